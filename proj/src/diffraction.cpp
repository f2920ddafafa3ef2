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

#include "ionaddr/diffraction.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "ionaddr/beamopt.hpp"
#include "ionaddr/errors.hpp"

namespace ionaddr::diffraction {

using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place forward DFT scaled by 1/sqrt(N).
void unitary_fft(std::vector<cplx>& data) {
  const int n = static_cast<int>(data.size());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : data) v *= scale;
}

double pupil_step(const PupilSpec& pupil, const Grid& grid) {
  return pupil.wavelength /
         (pupil.numerical_aperture * static_cast<double>(grid.size) *
          grid.sample_spacing);
}

}  // namespace

double Aberrations::wavefront(double rho) const {
  const double r2 = rho * rho;
  return (defocus + astigmatism) * r2 + spherical * r2 * r2 + coma * r2 * rho;
}

void PupilSpec::validate() const {
  if (!(numerical_aperture > 0.0 && numerical_aperture < 1.0))
    throw DomainError("numerical aperture must lie in (0, 1)");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw DomainError("wavelength must be positive");
  const auto& a = aberrations;
  if (!std::isfinite(a.defocus) || !std::isfinite(a.spherical) ||
      !std::isfinite(a.coma) || !std::isfinite(a.astigmatism))
    throw DomainError("aberration coefficients must be finite");
}

void ChannelGeometry::validate() const {
  if (channel_count < 1) throw DomainError("channel_count must be >= 1");
  if (!(ion_pitch > 0.0)) throw DomainError("ion_pitch must be positive");
  if (!(demagnification > 0.0))
    throw DomainError("demagnification must be positive");
  if (!(object_waist > 0.0)) throw DomainError("object_waist must be positive");
  if (!(fiber_waist > 0.0)) throw DomainError("fiber_waist must be positive");
  if (!(fiber_pitch > 0.0)) throw DomainError("fiber_pitch must be positive");
}

Illumination ChannelGeometry::illumination(const PupilSpec& pupil) const {
  const double na_eff = pupil.wavelength / (pi * image_waist());
  return {na_eff / pupil.numerical_aperture, 0.0};
}

void check_grid(const PupilSpec& pupil, const Grid& grid) {
  pupil.validate();
  if (grid.size < 64 || grid.size % 2 != 0)
    throw SamplingError("DFT length must be even and at least 64");
  if (!(grid.sample_spacing > 0.0))
    throw SamplingError("sample spacing must be positive");
  const double spot = pupil.wavelength / (2.0 * pupil.numerical_aperture);
  if (spot / grid.sample_spacing < 4.0)
    throw SamplingError("fewer than 4 samples across the diffraction-limited spot");
  const double step = pupil_step(pupil, grid);
  if (2.0 / step < 64.0)
    throw SamplingError("fewer than 64 samples across the pupil; enlarge the grid");
  if (static_cast<double>(grid.size) * step < 4.0)
    throw SamplingError("pupil zero padding below 2x; reduce sample spacing");
}

FocalField focal_field(const PupilSpec& pupil, const Illumination& illum,
                       const Grid& grid) {
  check_grid(pupil, grid);
  if (!(illum.fill > 0.0) || !std::isfinite(illum.offset))
    throw DomainError("pupil fill factor must be positive");
  FocalField out;
  out.pupil_step = pupil_step(pupil, grid);
  const std::size_t n = grid.size;
  out.pupil.assign(n, cplx{0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) {
    const double idx = j < n / 2 ? static_cast<double>(j)
                                 : static_cast<double>(j) - static_cast<double>(n);
    const double rho = idx * out.pupil_step;
    if (std::abs(rho) > 1.0) continue;
    const double u = (rho - illum.offset) / illum.fill;
    const double amp = std::exp(-u * u);
    const double phase = 2.0 * pi * pupil.aberrations.wavefront(rho);
    out.pupil[j] = std::polar(amp, phase);
  }
  out.focal = out.pupil;
  unitary_fft(out.focal);
  return out;
}

IntensityProfile psf_1d(const PupilSpec& pupil, const Illumination& illum,
                        const Grid& grid) {
  const FocalField field = focal_field(pupil, illum, grid);
  const std::size_t n = grid.size;
  std::vector<double> intensity(n);
  for (std::size_t k = 0; k < n; ++k)
    intensity[(k + n / 2) % n] = std::norm(field.focal[k]);
  const double peak = *std::max_element(intensity.begin(), intensity.end());
  for (auto& v : intensity) v /= peak;
  return IntensityProfile::make_1d(
      std::move(intensity), grid.sample_spacing,
      -static_cast<double>(n / 2) * grid.sample_spacing);
}

IntensityProfile psf_2d(const PupilSpec& pupil, const Illumination& illum_x,
                        const Illumination& illum_y, const Grid& grid,
                        std::size_t crop) {
  const IntensityProfile px = psf_1d(pupil, illum_x, grid);
  const IntensityProfile py = psf_1d(pupil, illum_y, grid);
  crop = std::min(crop, grid.size);
  const std::size_t first = grid.size / 2 - crop / 2;
  IntensityProfile out;
  out.width = crop;
  out.height = crop;
  out.pixel_pitch = grid.sample_spacing;
  out.origin = px.position(first);
  out.samples.resize(crop * crop);
  for (std::size_t r = 0; r < crop; ++r)
    for (std::size_t c = 0; c < crop; ++c)
      out.at(r, c) = py.samples[first + r] * px.samples[first + c];
  return out;
}

std::vector<double> crosstalk_at(const IntensityProfile& profile,
                                 std::span<const double> offsets) {
  profile.validate();
  const std::size_t peak_idx = profile.argmax();
  const double peak = profile.samples[peak_idx];
  if (!(peak > 0.0)) throw DomainError("profile has no positive peak");
  const double x0 = profile.position(peak_idx);
  std::vector<double> out;
  out.reserve(offsets.size());
  for (double d : offsets) out.push_back(profile.interpolate(x0 + d) / peak);
  return out;
}

Grid chain_grid(const ChannelGeometry& geom, const Grid& grid) {
  const double half = 0.5 * geom.ion_pitch;
  const double per_half = std::max(1.0, std::round(half / grid.sample_spacing));
  return {half / per_half, grid.size};
}

ChainMap chain_intensity_map(const ChannelGeometry& geom,
                             const PupilSpec& pupil,
                             std::span<const int> active_channels,
                             const Grid& grid) {
  geom.validate();
  if (active_channels.empty())
    throw DomainError("chain map needs at least one active channel");
  std::set<int> unique(active_channels.begin(), active_channels.end());
  for (int ch : unique)
    if (ch < 1 || ch > geom.channel_count)
      throw DomainError("active channel " + std::to_string(ch) +
                        " outside 1.." + std::to_string(geom.channel_count));

  const Grid g = chain_grid(geom, grid);
  const IntensityProfile spot = psf_1d(pupil, geom.illumination(pupil), g);
  const auto per_pitch = static_cast<long>(std::lround(geom.ion_pitch / g.sample_spacing));
  const long n = static_cast<long>(g.size);
  const long center = n / 2;

  // Site i (1-based) sits at (2i - count - 1) / 2 pitches from the axis.
  auto site_shift = [&](int i) {
    return static_cast<long>(2 * i - geom.channel_count - 1) * per_pitch / 2;
  };

  ChainMap out;
  out.profile = spot;
  std::fill(out.profile.samples.begin(), out.profile.samples.end(), 0.0);
  for (int ch : unique) {
    const long shift = site_shift(ch);
    for (long k = std::max(0L, shift); k < std::min(n, n + shift); ++k)
      out.profile.samples[static_cast<std::size_t>(k)] +=
          spot.samples[static_cast<std::size_t>(k - shift)];
  }
  for (int i = 1; i <= geom.channel_count; ++i) {
    const long idx = center + site_shift(i);
    out.site_positions.push_back(out.profile.position(static_cast<std::size_t>(idx)));
    out.site_crosstalk.push_back(out.profile.samples[static_cast<std::size_t>(idx)]);
  }
  return out;
}

namespace {

double worst_neighbour(const PupilSpec& pupil, const Illumination& illum,
                       const Grid& grid, double offset) {
  const IntensityProfile p = psf_1d(pupil, illum, grid);
  const double offs[] = {-offset, offset};
  const auto ct = crosstalk_at(p, offs);
  return std::max(ct[0], ct[1]);
}

}  // namespace

double solve_spherical_for_crosstalk(const PupilSpec& pupil,
                                     const Illumination& illum,
                                     const Grid& grid, double offset,
                                     double target) {
  if (!(target > 0.0)) throw DomainError("crosstalk target must be positive");
  PupilSpec trial = pupil;
  auto eval = [&](double s) {
    trial.aberrations.spherical = s;
    return worst_neighbour(trial, illum, grid, offset);
  };
  double lo = pupil.aberrations.spherical;
  if (eval(lo) >= target) return lo;
  constexpr double kStep = 0.02;
  constexpr double kLimit = 10.0;
  double hi = lo;
  while (true) {
    hi += kStep;
    if (hi > pupil.aberrations.spherical + kLimit)
      throw InfeasibleError("no spherical coefficient below 10 waves reaches the target");
    if (eval(hi) >= target) break;
    lo = hi;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

double ToleranceRow::crosstalk() const {
  return std::max(crosstalk_left, crosstalk_right);
}

double design_efl(const ChannelGeometry& geom, double wavelength) {
  return pi * geom.fiber_waist * geom.object_waist / wavelength;
}

ToleranceRow evaluate_perturbation(const ChannelGeometry& geom,
                                   const PupilSpec& pupil, const Grid& grid,
                                   const MlaPerturbation& p) {
  geom.validate();
  pupil.validate();
  const double lens_efl = p.efl + p.efl_error;
  if (!(p.efl > 0.0) || !(lens_efl > 0.0))
    throw DomainError("MLA focal length must be positive");

  // Each array is mounted for its nominal EFL: fiber facet at the front focal
  // plane, relay object plane at the back one. efl_error is the as-built
  // deviation the mount does not know about.
  const double mount = p.efl;
  beamopt::GaussianBeamAxis fiber;
  fiber.wavelength = pupil.wavelength;
  fiber.waist_radius = geom.fiber_waist;
  const beamopt::ParaxialElement train[] = {
      beamopt::ParaxialElement::free_space(mount),
      beamopt::ParaxialElement::thin_lens(lens_efl),
      beamopt::ParaxialElement::free_space(mount),
      beamopt::ParaxialElement::ideal_magnifier(1.0 / geom.demagnification),
  };
  const beamopt::GaussianBeamAxis image = beamopt::propagate(fiber, train);

  ToleranceRow row;
  row.perturbation = p;
  row.image_waist = image.waist_radius;
  row.fill = image.divergence() / pupil.numerical_aperture;
  // A decentred lens tilts the beam by decenter/f; the relay multiplies
  // angles by the demagnification, walking the beam across the stop.
  row.pupil_offset = geom.demagnification * (p.decenter / lens_efl) /
                     pupil.numerical_aperture;
  const double na = pupil.numerical_aperture;
  row.defocus_waves = image.waist_position * na * na / (2.0 * pupil.wavelength);

  PupilSpec perturbed = pupil;
  perturbed.aberrations.defocus += row.defocus_waves;
  const Illumination illum{row.fill, row.pupil_offset};
  const IntensityProfile spot = psf_1d(perturbed, illum, grid);
  const double offs[] = {-geom.ion_pitch, geom.ion_pitch};
  const auto ct = crosstalk_at(spot, offs);
  row.crosstalk_left = ct[0];
  row.crosstalk_right = ct[1];
  return row;
}

std::vector<ToleranceRow> mla_tolerance_sweep(
    const ChannelGeometry& geom, const PupilSpec& pupil, const Grid& grid,
    std::span<const MlaPerturbation> perturbations) {
  if (perturbations.empty())
    throw DomainError("tolerance sweep needs at least one perturbation");
  std::vector<ToleranceRow> rows;
  rows.reserve(perturbations.size());
  for (const auto& p : perturbations)
    rows.push_back(evaluate_perturbation(geom, pupil, grid, p));
  return rows;
}

std::vector<MlaPerturbation> efl_series(double start, double stop, double step) {
  if (!(start > 0.0) || !(step > 0.0) || stop < start)
    throw DomainError("EFL series needs 0 < start <= stop and step > 0");
  const auto count =
      static_cast<std::size_t>(std::floor((stop - start) / step + 1e-3)) + 1;
  std::vector<MlaPerturbation> out(count);
  // Snap to 1 pm so tabulated focal lengths print as entered.
  for (std::size_t i = 0; i < count; ++i)
    out[i].efl = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
  return out;
}

std::vector<MlaPerturbation> sample_perturbations(
    const MlaPerturbation& nominal, const ToleranceDistribution& dist,
    std::size_t count, std::uint64_t seed) {
  if (dist.efl_sigma < 0.0 || dist.decenter_sigma < 0.0)
    throw DomainError("tolerance sigmas must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<MlaPerturbation> out(count, nominal);
  for (auto& p : out) {
    p.efl_error = nominal.efl_error + dist.efl_sigma * unit(rng);
    p.decenter = nominal.decenter + dist.decenter_sigma * unit(rng);
  }
  return out;
}

ToleranceRow select_best_efl(std::span<const ToleranceRow> table) {
  if (table.empty()) throw DomainError("cannot select from an empty table");
  const ToleranceRow* best = &table.front();
  for (const auto& row : table) {
    const double c = row.crosstalk();
    const double b = best->crosstalk();
    if (c < b || (c == b && row.perturbation.efl < best->perturbation.efl))
      best = &row;
  }
  return *best;
}

}  // namespace ionaddr::diffraction
