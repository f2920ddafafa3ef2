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

#include "ionaddr/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ionaddr/errors.hpp"

namespace ionaddr {

IntensityProfile IntensityProfile::make_1d(std::vector<double> values,
                                           double pitch, double origin) {
  IntensityProfile p;
  p.width = values.size();
  p.height = 1;
  p.samples = std::move(values);
  p.pixel_pitch = pitch;
  p.origin = origin;
  return p;
}

void IntensityProfile::validate() const {
  if (!(pixel_pitch > 0.0)) throw DomainError("pixel pitch must be positive");
  if (width == 0 || height == 0 || samples.size() != width * height)
    throw DomainError("profile shape does not match sample count");
  for (double s : samples)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw DomainError("profile samples must be finite and nonnegative");
  if (!(exposure > 0.0)) throw DomainError("exposure must be positive");
  if (!source_exposure.empty() && source_exposure.size() != samples.size())
    throw DomainError("per-sample exposures do not match the sample count");
}

double IntensityProfile::interpolate(double x) const {
  if (!is_1d()) throw DomainError("interpolate requires a 1D profile");
  const double u = (x - origin) / pixel_pitch;
  const double last = static_cast<double>(width - 1);
  // Allow a few ulps of slack so that exact grid positions survive rounding.
  const double slack = 1e-9;
  if (u < -slack || u > last + slack)
    throw DomainError("position " + std::to_string(x) +
                      " m lies outside the profile support");
  const double clamped = std::clamp(u, 0.0, last);
  const auto i0 = static_cast<std::size_t>(std::floor(clamped));
  if (i0 + 1 >= width) return samples[width - 1];
  const double t = clamped - static_cast<double>(i0);
  return (1.0 - t) * samples[i0] + t * samples[i0 + 1];
}

std::size_t IntensityProfile::argmax() const {
  return static_cast<std::size_t>(
      std::distance(samples.begin(), std::max_element(samples.begin(), samples.end())));
}

IntensityProfile IntensityProfile::row_through_peak() const {
  if (is_1d()) return *this;
  const std::size_t row = argmax() / width;
  IntensityProfile out = *this;
  out.height = 1;
  out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(row * width),
                     samples.begin() + static_cast<std::ptrdiff_t>((row + 1) * width));
  if (!source_exposure.empty())
    out.source_exposure.assign(
        source_exposure.begin() + static_cast<std::ptrdiff_t>(row * width),
        source_exposure.begin() + static_cast<std::ptrdiff_t>((row + 1) * width));
  return out;
}

}  // namespace ionaddr
