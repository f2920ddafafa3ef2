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

#include "ionaddr/pulsematch.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ionaddr/errors.hpp"

namespace ionaddr::pulsematch {

using std::numbers::ln2;
using std::numbers::pi;

PulseSpec PulseSpec::from_length(double length, double speed) {
  PulseSpec p;
  p.propagation_speed = speed;
  p.duration_fwhm = length / speed;
  p.validate();
  return p;
}

void PulseSpec::validate() const {
  if (!(duration_fwhm > 0.0)) throw DomainError("pulse duration must be positive");
  if (!(propagation_speed > 0.0)) throw DomainError("propagation speed must be positive");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
}

void DelayStage::validate() const {
  if (!(travel > 0.0)) throw DomainError("stage travel must be positive");
  if (!(resolution > 0.0) || resolution > travel)
    throw DomainError("stage resolution must be in (0, travel]");
  if (position < 0.0 || position > travel)
    throw DomainError("stage position outside [0, travel]");
}

std::size_t DelayStage::max_step() const {
  return static_cast<std::size_t>(std::floor(travel / resolution + 1e-9));
}

double DelayStage::max_position() const {
  return static_cast<double>(max_step()) * resolution;
}

double ChannelPath::mismatch() const {
  return static_offset + stage.position + splice_adjustment - reference_length;
}

double visibility(const PulseSpec& pulse, double mismatch) {
  pulse.validate();
  const double u = mismatch / pulse.length();
  return std::exp(-ln2 * u * u);
}

StageSolution optimize_stage(const ChannelPath& path, const PulseSpec& pulse) {
  path.stage.validate();
  pulse.validate();
  ChannelPath trial = path;
  StageSolution best;
  best.channel = path.channel;
  double best_abs = std::numeric_limits<double>::infinity();
  const std::size_t steps = path.stage.max_step();
  // Increasing positions with a strict comparison keep the smaller position
  // on ties.
  for (std::size_t k = 0; k <= steps; ++k) {
    trial.stage.position = static_cast<double>(k) * path.stage.resolution;
    const double m = trial.mismatch();
    if (std::abs(m) < best_abs) {
      best_abs = std::abs(m);
      best.position = trial.stage.position;
      best.residual = m;
    }
  }
  best.visibility = visibility(pulse, best.residual);
  best.out_of_range = best_abs > 0.5 * path.stage.resolution * (1.0 + 1e-12);
  return best;
}

SplicePlan splice_plan(std::span<const ChannelPath> paths, const PulseSpec& pulse,
                       double visibility_floor) {
  if (!(visibility_floor > 0.0 && visibility_floor < 1.0))
    throw DomainError("visibility floor must lie in (0, 1)");
  SplicePlan plan;
  for (const auto& path : paths) {
    const double guaranteed = visibility(pulse, 0.5 * path.stage.resolution);
    if (visibility_floor > guaranteed)
      throw InfeasibleError(
          "visibility floor exceeds what the stage resolution can guarantee on channel " +
          std::to_string(path.channel));
    StageSolution sol = optimize_stage(path, pulse);
    if (sol.visibility < visibility_floor) {
      // Choose the splice so that the stage correction lands at mid-travel.
      ChannelPath adjusted = path;
      const double mid = 0.5 * path.stage.travel;
      const double splice = path.reference_length - path.static_offset - mid -
                            path.splice_adjustment;
      adjusted.splice_adjustment = path.splice_adjustment + splice;
      plan.entries.push_back({path.channel, splice});
      sol = optimize_stage(adjusted, pulse);
      if (sol.visibility < visibility_floor)
        throw InfeasibleError("channel " + std::to_string(path.channel) +
                              " misses the floor even after splicing");
    }
    plan.stages.push_back(sol);
  }
  return plan;
}

IntensityProfile fringe_pattern(const PulseSpec& pulse, double mismatch,
                                double spatial_angle, const FringeSampling& s) {
  if (!(spatial_angle > 0.0 && spatial_angle < 0.5 * pi))
    throw DomainError("beam crossing angle must lie in (0, pi/2)");
  if (s.samples_per_period < 4 || s.periods < 3)
    throw DomainError("fringe sampling needs >= 4 samples per period and >= 3 periods");
  const double v = visibility(pulse, mismatch);
  const double period = pulse.wavelength / (2.0 * std::sin(spatial_angle));
  const double dx = period / static_cast<double>(s.samples_per_period);
  const std::size_t n = s.samples_per_period * s.periods;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i)
    values[i] = 1.0 + v * std::cos(2.0 * pi * static_cast<double>(i) /
                                   static_cast<double>(s.samples_per_period));
  return IntensityProfile::make_1d(std::move(values), dx);
}

}  // namespace ionaddr::pulsematch
