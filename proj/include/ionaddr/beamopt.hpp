// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IONADDR_BEAMOPT_HPP
#define IONADDR_BEAMOPT_HPP

#include <complex>
#include <span>
#include <vector>

namespace ionaddr::beamopt {

// Paraxial Gaussian beam along one transverse axis. waist_position is measured
// along the optical axis from the current reference plane (positive means the
// waist lies downstream). All lengths in meters.
struct GaussianBeamAxis {
  double wavelength = 0.0;
  double waist_radius = 0.0;  // 1/e^2 intensity radius w0
  double waist_position = 0.0;
  double power_fraction = 1.0;

  void validate() const;

  double rayleigh_range() const;
  // 1/e^2 far-field half-angle; also the NA we assign to the mode.
  double divergence() const;
  double mode_field_diameter() const { return 2.0 * waist_radius; }

  // q at the current reference plane: -waist_position + i*zR.
  std::complex<double> q() const;
  static GaussianBeamAxis from_q(std::complex<double> q, double wavelength,
                                 double power_fraction = 1.0);
  static GaussianBeamAxis from_mfd(double mfd, double wavelength);
};

struct EllipticalBeam {
  GaussianBeamAxis x_axis;
  GaussianBeamAxis y_axis;

  void validate() const;
};

struct Abcd {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }
  // this * rhs: rhs acts first.
  Abcd operator*(const Abcd& rhs) const;
};

class ParaxialElement {
 public:
  enum class Kind { FreeSpace, ThinLens, IdealMagnifier };

  static ParaxialElement free_space(double length);
  static ParaxialElement thin_lens(double focal_length);
  // magnification < 1 demagnifies. Ideal imaging between conjugate planes.
  static ParaxialElement ideal_magnifier(double magnification,
                                         bool telecentric = true);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  bool telecentric() const { return telecentric_; }
  Abcd abcd() const;

 private:
  ParaxialElement(Kind kind, double value, bool telecentric)
      : kind_(kind), value_(value), telecentric_(telecentric) {}

  Kind kind_;
  double value_;
  bool telecentric_;
};

// Ordered elements; light meets elements.front() first.
struct OpticalTrain {
  std::vector<ParaxialElement> elements;

  Abcd system_matrix() const;
};

GaussianBeamAxis propagate(const GaussianBeamAxis& beam, const Abcd& m);
GaussianBeamAxis propagate(const GaussianBeamAxis& beam,
                           const ParaxialElement& element);
GaussianBeamAxis propagate(const GaussianBeamAxis& beam,
                           std::span<const ParaxialElement> elements);

double beam_radius_at(const GaussianBeamAxis& beam, double z);

// Object/image side of a paraxial relay, for the chief-height times
// marginal-angle budget.
struct LagrangeBudget {
  double object_pitch = 0.0;
  double object_na = 0.0;
  double image_pitch = 0.0;
  double image_na = 0.0;

  void validate() const;
};

struct LagrangeCheck {
  bool feasible = false;
  double source_invariant = 0.0;  // m*rad
  double target_invariant = 0.0;  // m*rad
};

LagrangeCheck lagrange_feasible(const LagrangeBudget& budget);

// Throws DomainError unless aspect > 0.
EllipticalBeam shape_elliptical(const EllipticalBeam& beam, double aspect);

}  // namespace ionaddr::beamopt

#endif  // IONADDR_BEAMOPT_HPP
