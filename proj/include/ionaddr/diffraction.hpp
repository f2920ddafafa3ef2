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

#ifndef IONADDR_DIFFRACTION_HPP
#define IONADDR_DIFFRACTION_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ionaddr/profile.hpp"

namespace ionaddr::diffraction {

// Seidel wavefront coefficients in waves, evaluated at the pupil edge
// (normalized pupil coordinate |rho| = 1) on the section along the chain.
struct Aberrations {
  double defocus = 0.0;      // rho^2
  double spherical = 0.0;    // rho^4
  double coma = 0.0;         // rho^3 cos(phi) -> rho^3 on the section
  double astigmatism = 0.0;  // rho^2 cos(2 phi) -> rho^2 on the section

  double wavefront(double rho) const;
};

struct PupilSpec {
  double numerical_aperture = 0.37;
  double wavelength = 532e-9;  // m
  Aberrations aberrations;

  void validate() const;
};

// Gaussian illumination of the pupil. fill is the beam 1/e^2 radius over the
// pupil radius; offset shifts the beam centre in units of the pupil radius.
struct Illumination {
  double fill = 0.9;
  double offset = 0.0;
};

// Focal-plane sampling: sample_spacing in meters and the DFT length. The pupil
// step follows as wavelength / (NA * size * sample_spacing).
struct Grid {
  double sample_spacing = 1e-7;
  std::size_t size = 8192;
};

struct ChannelGeometry {
  int channel_count = 16;
  double ion_pitch = 4e-6;          // m
  double demagnification = 62.5;
  double object_waist = 56.25e-6;   // m, MLA output waist
  double fiber_waist = 1.65e-6;     // m, half the fiber-array MFD
  double fiber_pitch = 250e-6;      // m

  void validate() const;
  double image_waist() const { return object_waist / demagnification; }
  // Pupil fill that reproduces image_waist() at this NA.
  Illumination illumination(const PupilSpec& pupil) const;
};

// Field on both sides of the unitary DFT, in FFT order (index 0 = axis).
struct FocalField {
  std::vector<std::complex<double>> pupil;
  std::vector<std::complex<double>> focal;
  double pupil_step = 0.0;  // normalized pupil coordinate per sample
};

// Throws SamplingError if the grid does not resolve both pupil and spot.
void check_grid(const PupilSpec& pupil, const Grid& grid);

FocalField focal_field(const PupilSpec& pupil, const Illumination& illum,
                       const Grid& grid);

// Unit-peak intensity along the chain axis, centred so that sample size/2
// sits at x = 0.
IntensityProfile psf_1d(const PupilSpec& pupil, const Illumination& illum,
                        const Grid& grid);

// Separable 2D rendering of an elliptical spot (rows along y). For plots only.
IntensityProfile psf_2d(const PupilSpec& pupil, const Illumination& illum_x,
                        const Illumination& illum_y, const Grid& grid,
                        std::size_t crop);

// I(peak + d) / I(peak) for every offset, peak = brightest sample.
std::vector<double> crosstalk_at(const IntensityProfile& profile,
                                 std::span<const double> offsets);

struct ChainMap {
  IntensityProfile profile;
  std::vector<double> site_positions;  // m
  std::vector<double> site_crosstalk;  // I_site / single-channel peak
};

// Grid spacing snapped so that half the ion pitch is a whole number of samples.
Grid chain_grid(const ChannelGeometry& geom, const Grid& grid);

// Incoherent sum of single-channel spots. Channels are numbered from 1.
ChainMap chain_intensity_map(const ChannelGeometry& geom,
                             const PupilSpec& pupil,
                             std::span<const int> active_channels,
                             const Grid& grid = {});

// Smallest spherical coefficient (waves) whose worst neighbour crosstalk at
// +-offset reaches target. Scans upward from the given aberrations.
double solve_spherical_for_crosstalk(const PupilSpec& pupil,
                                     const Illumination& illum,
                                     const Grid& grid, double offset,
                                     double target);

struct MlaPerturbation {
  double efl = 0.0;        // m, nominal lens EFL
  double efl_error = 0.0;  // m
  double decenter = 0.0;   // m, lens vs fiber core along the chain
};

struct ToleranceRow {
  MlaPerturbation perturbation;
  double image_waist = 0.0;     // m
  double fill = 0.0;
  double pupil_offset = 0.0;
  double defocus_waves = 0.0;
  double crosstalk_left = 0.0;
  double crosstalk_right = 0.0;

  double crosstalk() const;
};

// EFL that maps the fiber mode onto the object waist when the fiber sits at
// the front focal plane.
double design_efl(const ChannelGeometry& geom, double wavelength);

ToleranceRow evaluate_perturbation(const ChannelGeometry& geom,
                                   const PupilSpec& pupil, const Grid& grid,
                                   const MlaPerturbation& p);

std::vector<ToleranceRow> mla_tolerance_sweep(
    const ChannelGeometry& geom, const PupilSpec& pupil, const Grid& grid,
    std::span<const MlaPerturbation> perturbations);

// start, start + step, ... up to stop inclusive (within step/1000).
std::vector<MlaPerturbation> efl_series(double start, double stop, double step);

struct ToleranceDistribution {
  double efl_sigma = 0.0;       // m
  double decenter_sigma = 0.0;  // m
};

// Gaussian draws around a nominal perturbation; deterministic in seed.
std::vector<MlaPerturbation> sample_perturbations(
    const MlaPerturbation& nominal, const ToleranceDistribution& dist,
    std::size_t count, std::uint64_t seed);

// Row with minimal crosstalk(); ties go to the smaller EFL.
ToleranceRow select_best_efl(std::span<const ToleranceRow> table);

}  // namespace ionaddr::diffraction

#endif  // IONADDR_DIFFRACTION_HPP
