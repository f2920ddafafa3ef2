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

#include "ionaddr/beamopt.hpp"

#include <cmath>
#include <numbers>

#include "ionaddr/errors.hpp"

namespace ionaddr::beamopt {

using std::numbers::pi;

void GaussianBeamAxis::validate() const {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw DomainError("beam wavelength must be positive");
  if (!(waist_radius > 0.0) || !std::isfinite(waist_radius))
    throw DomainError("beam waist radius must be positive");
  if (!std::isfinite(waist_position))
    throw DomainError("beam waist position must be finite");
}

double GaussianBeamAxis::rayleigh_range() const {
  return pi * waist_radius * waist_radius / wavelength;
}

double GaussianBeamAxis::divergence() const {
  return wavelength / (pi * waist_radius);
}

std::complex<double> GaussianBeamAxis::q() const {
  return {-waist_position, rayleigh_range()};
}

GaussianBeamAxis GaussianBeamAxis::from_q(std::complex<double> q,
                                          double wavelength,
                                          double power_fraction) {
  if (!(q.imag() > 0.0) || !std::isfinite(q.real()))
    throw SingularPropagationError("complex beam parameter has no finite waist");
  GaussianBeamAxis out;
  out.wavelength = wavelength;
  out.waist_radius = std::sqrt(q.imag() * wavelength / pi);
  out.waist_position = 0.0 - q.real();  // never a negative zero
  out.power_fraction = power_fraction;
  return out;
}

GaussianBeamAxis GaussianBeamAxis::from_mfd(double mfd, double wavelength) {
  GaussianBeamAxis out;
  out.wavelength = wavelength;
  out.waist_radius = 0.5 * mfd;
  out.validate();
  return out;
}

void EllipticalBeam::validate() const {
  x_axis.validate();
  y_axis.validate();
  if (x_axis.wavelength != y_axis.wavelength)
    throw DomainError("elliptical beam axes must share one wavelength");
}

Abcd Abcd::operator*(const Abcd& rhs) const {
  return {a * rhs.a + b * rhs.c, a * rhs.b + b * rhs.d,
          c * rhs.a + d * rhs.c, c * rhs.b + d * rhs.d};
}

ParaxialElement ParaxialElement::free_space(double length) {
  if (!std::isfinite(length)) throw DomainError("free-space length must be finite");
  return {Kind::FreeSpace, length, false};
}

ParaxialElement ParaxialElement::thin_lens(double focal_length) {
  if (!std::isfinite(focal_length) || focal_length == 0.0)
    throw DomainError("thin lens focal length must be finite and nonzero");
  return {Kind::ThinLens, focal_length, false};
}

ParaxialElement ParaxialElement::ideal_magnifier(double magnification,
                                                 bool telecentric) {
  if (!std::isfinite(magnification) || magnification == 0.0)
    throw DomainError("magnification must be finite and nonzero");
  return {Kind::IdealMagnifier, magnification, telecentric};
}

Abcd ParaxialElement::abcd() const {
  switch (kind_) {
    case Kind::FreeSpace:
      return {1.0, value_, 0.0, 1.0};
    case Kind::ThinLens:
      return {1.0, 0.0, -1.0 / value_, 1.0};
    case Kind::IdealMagnifier:
      return {value_, 0.0, 0.0, 1.0 / value_};
  }
  return {};
}

Abcd OpticalTrain::system_matrix() const {
  Abcd m;
  for (const auto& e : elements) m = e.abcd() * m;
  return m;
}

GaussianBeamAxis propagate(const GaussianBeamAxis& beam, const Abcd& m) {
  beam.validate();
  const std::complex<double> q = beam.q();
  const std::complex<double> den = m.c * q + m.d;
  if (den == 0.0 || !std::isfinite(den.real()) || !std::isfinite(den.imag()))
    throw SingularPropagationError("C*q + D vanishes for this element");
  return GaussianBeamAxis::from_q((m.a * q + m.b) / den, beam.wavelength,
                                  beam.power_fraction);
}

GaussianBeamAxis propagate(const GaussianBeamAxis& beam,
                           const ParaxialElement& element) {
  return propagate(beam, element.abcd());
}

GaussianBeamAxis propagate(const GaussianBeamAxis& beam,
                           std::span<const ParaxialElement> elements) {
  GaussianBeamAxis out = beam;
  for (const auto& e : elements) out = propagate(out, e);
  return out;
}

double beam_radius_at(const GaussianBeamAxis& beam, double z) {
  const double u = (z - beam.waist_position) / beam.rayleigh_range();
  return beam.waist_radius * std::sqrt(1.0 + u * u);
}

void LagrangeBudget::validate() const {
  if (!(object_pitch > 0.0 && object_na > 0.0 && image_pitch > 0.0 &&
        image_na > 0.0))
    throw DomainError("Lagrange budget fields must all be positive");
}

LagrangeCheck lagrange_feasible(const LagrangeBudget& budget) {
  budget.validate();
  LagrangeCheck out;
  out.source_invariant = 0.5 * budget.object_pitch * budget.object_na;
  out.target_invariant = 0.5 * budget.image_pitch * budget.image_na;
  out.feasible = out.source_invariant <= out.target_invariant;
  return out;
}

EllipticalBeam shape_elliptical(const EllipticalBeam& beam, double aspect) {
  if (!(aspect > 0.0) || !std::isfinite(aspect))
    throw DomainError("ellipticity aspect must be positive");
  beam.validate();
  EllipticalBeam out = beam;
  out.y_axis.waist_radius = aspect * beam.x_axis.waist_radius;
  out.y_axis.waist_position = beam.x_axis.waist_position;
  return out;
}

}  // namespace ionaddr::beamopt
