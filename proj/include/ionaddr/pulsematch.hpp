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

#ifndef IONADDR_PULSEMATCH_HPP
#define IONADDR_PULSEMATCH_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "ionaddr/profile.hpp"

namespace ionaddr::pulsematch {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class Envelope { Gaussian };

struct PulseSpec {
  double duration_fwhm = 10e-12;  // s, intensity FWHM
  double wavelength = 532e-9;     // m
  Envelope envelope = Envelope::Gaussian;
  double propagation_speed = kSpeedOfLight;  // m/s

  // Pulse with the given spatial length L = speed * duration.
  static PulseSpec from_length(double length, double speed = kSpeedOfLight);

  void validate() const;
  double length() const { return propagation_speed * duration_fwhm; }
};

struct DelayStage {
  double travel = 4e-3;          // m
  double resolution = 210e-6;    // m
  double position = 0.0;         // m, on the resolution grid

  void validate() const;
  std::size_t max_step() const;  // last grid index inside the travel
  double max_position() const;
};

// Effective mismatch = static_offset + stage.position + splice_adjustment -
// reference_length. reference_length is the reference channel's own path
// contribution (its stage setting), zero by default.
struct ChannelPath {
  int channel = 1;
  double static_offset = 0.0;
  DelayStage stage;
  double splice_adjustment = 0.0;
  double reference_length = 0.0;

  double mismatch() const;
};

// Envelope overlap of two Gaussian pulses separated by mismatch, i.e. the
// fringe visibility for a common carrier.
double visibility(const PulseSpec& pulse, double mismatch);

struct StageSolution {
  int channel = 0;
  double position = 0.0;   // m
  double residual = 0.0;   // m, signed mismatch after the move
  double visibility = 0.0;
  bool out_of_range = false;
};

StageSolution optimize_stage(const ChannelPath& path, const PulseSpec& pulse);

struct SpliceEntry {
  int channel = 0;
  double splice_adjustment = 0.0;  // m, added fiber length (negative = cut)
};

struct SplicePlan {
  std::vector<SpliceEntry> entries;
  std::vector<StageSolution> stages;  // after applying entries
};

// Throws InfeasibleError when the floor is above the visibility guaranteed by
// half a stage step.
SplicePlan splice_plan(std::span<const ChannelPath> paths, const PulseSpec& pulse,
                       double visibility_floor);

struct FringeSampling {
  std::size_t samples_per_period = 32;
  std::size_t periods = 20;
};

// I(x) = 1 + V cos(2 pi x * 2 sin(theta) / lambda).
IntensityProfile fringe_pattern(const PulseSpec& pulse, double mismatch,
                                double spatial_angle, const FringeSampling& s = {});

}  // namespace ionaddr::pulsematch

#endif  // IONADDR_PULSEMATCH_HPP
