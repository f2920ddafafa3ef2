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

// Writes the synthetic demo inputs under a target directory: a four-exposure
// camera stack of a 0.9 um spot on a 1e-4 pedestal with its sidecar, and a
// measured-splitter CSV built from the synthetic factor-5 dataset.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <fmt/format.h>

#include "ionaddr/formats.hpp"
#include "ionaddr/profiles.hpp"
#include "ionaddr/rng.hpp"
#include "ionaddr/splitter.hpp"

namespace fs = std::filesystem;
using namespace ionaddr;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_demo_data <dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  constexpr std::uint64_t kSeed = 20240601;

  std::vector<double> truth(601);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double x = -30e-6 + static_cast<double>(i) * 0.1e-6;
    truth[i] = std::exp(-2.0 * x * x / (0.9e-6 * 0.9e-6)) + 1e-4;
  }
  profiles::RenderSettings rs;
  rs.noise = {3.0, 2.0, true};
  const auto stack = profiles::render_stack(IntensityProfile::make_1d(truth, 0.1e-6, -30e-6), rs,
                                            substream_seed(kSeed, "profiles"));

  formats::json frames = formats::json::array();
  for (const auto& f : stack.frames) {
    const auto name = fmt::format("frame_{:04}.csv", static_cast<int>(f.exposure));
    formats::write_file_atomic(dir / name, formats::profile_csv(f));
    frames.push_back({{"file", name}, {"exposure", f.exposure},
                      {"saturation_level", rs.full_scale}});
  }
  const formats::json sidecar = {
      {"frames", frames},
      {"ion_pitch_m", 4e-6},
      {"neighbor_count", 2},
      {"noise", {{"dark_noise_counts", 3.0}, {"read_noise_counts", 2.0}, {"shot_noise", true}}},
      {"dark_region", {0, 150}},
  };
  formats::write_file_atomic(dir / "stack_sidecar.json", sidecar.dump(2) + "\n");
  formats::write_file_atomic(dir / "measured_splitter.csv",
                             formats::leaf_powers_csv(splitter::synthetic_factor5_dataset()));
  std::cout << "wrote demo data to " << dir.string() << "\n";
  return 0;
}
