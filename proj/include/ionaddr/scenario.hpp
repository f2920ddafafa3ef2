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

#ifndef IONADDR_SCENARIO_HPP
#define IONADDR_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ionaddr/diffraction.hpp"
#include "ionaddr/powerbudget.hpp"
#include "ionaddr/pulsematch.hpp"

namespace ionaddr {

struct SplitterSection {
  enum class Source { Synthetic, MeasuredCsv, TreeJson };
  Source source = Source::Synthetic;
  std::filesystem::path file;
  double reference_temp = 23.0;  // degC
  std::optional<std::pair<double, double>> thermal_range;
  double thermal_target = 0.006;
};

struct BudgetSection {
  double input_power = 2.0;  // W
  std::vector<powerbudget::LossElement> losses;
  double threshold_power = 2e-3;  // W
  double rabi_power_ind = 2e-3;   // W
  double rabi_power_glob = 2e-3;  // W
  double rabi_rate_hz = 1e6;      // Hz (Omega / 2 pi)
};

struct CrosstalkSection {
  diffraction::ChannelGeometry geometry;
  diffraction::PupilSpec pupil;
  diffraction::Grid grid;
  bool match_measured = false;  // solve spherical for the measured level
  double crosstalk_target = 1e-4;
};

struct ToleranceSection {
  double efl_start = 0.525e-3;
  double efl_stop = 1.0e-3;
  double efl_step = 0.025e-3;
  std::vector<double> decenters{0.0};  // m
  std::size_t samples = 0;             // Monte Carlo draws around the best EFL
  double efl_sigma = 0.0;              // m
  double decenter_sigma = 0.0;         // m
};

struct PathSection {
  pulsematch::PulseSpec pulse;
  pulsematch::DelayStage stage;
  double reference_length = 0.0;
  std::vector<pulsematch::ChannelPath> paths;
  double visibility_floor = 0.999;
  double fringe_angle = 0.01;  // rad
  int fringe_channel = 0;      // 0: worst channel after optimisation
};

struct Scenario {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::filesystem::path base_dir;
  std::filesystem::path output_dir;

  std::optional<SplitterSection> splitter;
  std::optional<BudgetSection> budget;
  std::optional<CrosstalkSection> crosstalk;
  std::optional<ToleranceSection> tolerance;
  std::optional<PathSection> paths;
  std::optional<std::filesystem::path> profile_sidecar;
};

// Parses and validates a YAML scenario. Errors are ConfigError with the line
// number and dotted key path.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace ionaddr

#endif  // IONADDR_SCENARIO_HPP
