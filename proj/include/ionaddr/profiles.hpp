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

#ifndef IONADDR_PROFILES_HPP
#define IONADDR_PROFILES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ionaddr/errors.hpp"
#include "ionaddr/profile.hpp"

namespace ionaddr::profiles {

// Readings at or above this fraction of full scale count as saturated.
inline constexpr double kSaturationFraction = 0.95;

// Frames on one pixel grid with ascending exposures.
struct ExposureStack {
  std::vector<IntensityProfile> frames;

  void validate() const;
};

class SaturatedPixelError : public DomainError {
 public:
  SaturatedPixelError(const std::string& what, std::vector<std::size_t> pixels)
      : DomainError(what), pixels_(std::move(pixels)) {}
  const std::vector<std::size_t>& pixels() const { return pixels_; }

 private:
  std::vector<std::size_t> pixels_;
};

// Per pixel: the longest unsaturated exposure, divided by its exposure.
IntensityProfile hdr_stitch(const ExposureStack& stack);

struct NoiseModel {
  double dark_noise = 0.0;  // counts RMS
  double read_noise = 0.0;  // counts RMS
  bool shot_noise = false;  // Poisson on counts

  void validate() const;
  double sigma_counts(double counts) const;
};

// Half-open sample index range [first, last).
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct PeakEstimate {
  std::size_t index = 0;
  double position = 0.0;  // m
  double value = 0.0;
};

// Three-point quadratic refinement around the brightest sample.
PeakEstimate refine_peak(const IntensityProfile& profile);

// 1/e^2 half width from the two crossings nearest the peak.
double beam_radius(const IntensityProfile& profile);

double noise_floor(const IntensityProfile& profile, IndexRange dark_region);

struct RatioEstimate {
  double offset = 0.0;  // m from the peak
  double ratio = 0.0;
  double uncertainty = 0.0;
  bool below_noise_floor = false;  // ratio is then only an upper bound
};

struct CrosstalkReport {
  double peak_position = 0.0;
  double peak_value = 0.0;
  std::vector<RatioEstimate> ratios;  // -n..-1, +1..+n pitches
  double noise_floor = 0.0;
};

CrosstalkReport extract_crosstalk(const IntensityProfile& profile, double ion_pitch,
                                  int neighbor_count, const NoiseModel& noise,
                                  std::optional<IndexRange> dark_region = {});

// (Imax - Imin) / (Imax + Imin) from windowed sinusoid fits; 0 for a flat
// profile.
double fringe_contrast(const IntensityProfile& profile);

// Box-integrates onto pixels of the given size. phase in [0, 1) shifts the
// pixel grid by that fraction of a pixel.
IntensityProfile downsample(const IntensityProfile& profile, double pixel_size,
                            double phase = 0.0);

struct DownsamplingBias {
  double reference_ratio = 0.0;  // on the fine profile
  double min_ratio = 0.0;        // over pixel phases
  double max_ratio = 0.0;
};

DownsamplingBias downsampling_bias(const IntensityProfile& profile,
                                   double pixel_size, double ion_pitch,
                                   std::size_t phases = 16);

struct RenderSettings {
  std::vector<double> exposures{1.0, 10.0, 100.0, 1000.0};
  double full_scale = 65535.0;     // counts
  double peak_fraction = 0.8;      // peak counts at exposure 1 / full_scale
  NoiseModel noise;
  bool quantize = true;
};

// Camera-like rendering of a nonnegative truth profile into an exposure stack.
ExposureStack render_stack(const IntensityProfile& truth,
                           const RenderSettings& settings, std::uint64_t seed);

}  // namespace ionaddr::profiles

#endif  // IONADDR_PROFILES_HPP
