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

#ifndef IONADDR_PROFILE_HPP
#define IONADDR_PROFILE_HPP

#include <cstddef>
#include <limits>
#include <vector>

namespace ionaddr {

// Sampled intensity field. 1D profiles have height == 1. Samples are stored
// row-major; sample (i, j) sits at origin + (i * pixel_pitch) along the row.
struct IntensityProfile {
  std::vector<double> samples;
  std::size_t width = 0;
  std::size_t height = 1;
  double pixel_pitch = 0.0;  // m
  double origin = 0.0;       // m, position of column 0
  double exposure = 1.0;     // relative
  double saturation_level = std::numeric_limits<double>::infinity();
  // Exposure each sample was read at, filled in by HDR stitching. Empty means
  // every sample shares `exposure`.
  std::vector<double> source_exposure;

  static IntensityProfile make_1d(std::vector<double> values, double pitch,
                                  double origin = 0.0);

  std::size_t size() const { return samples.size(); }
  bool is_1d() const { return height == 1; }
  double position(std::size_t column) const {
    return origin + static_cast<double>(column) * pixel_pitch;
  }
  double& at(std::size_t row, std::size_t col) {
    return samples[row * width + col];
  }
  double at(std::size_t row, std::size_t col) const {
    return samples[row * width + col];
  }

  // Throws DomainError on negative samples, non-positive pitch or shape mismatch.
  void validate() const;

  // Linear interpolation at a physical position; throws DomainError outside
  // the sampled support. 1D only.
  double interpolate(double x) const;

  // Index of the largest sample (first on ties).
  std::size_t argmax() const;

  double exposure_at(std::size_t index) const {
    return source_exposure.empty() ? exposure : source_exposure[index];
  }

  // Row through the brightest pixel of a 2D profile; identity for 1D.
  IntensityProfile row_through_peak() const;
};

}  // namespace ionaddr

#endif  // IONADDR_PROFILE_HPP
