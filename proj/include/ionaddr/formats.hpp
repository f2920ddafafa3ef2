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

#ifndef IONADDR_FORMATS_HPP
#define IONADDR_FORMATS_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ionaddr/diffraction.hpp"
#include "ionaddr/powerbudget.hpp"
#include "ionaddr/profile.hpp"
#include "ionaddr/profiles.hpp"
#include "ionaddr/pulsematch.hpp"
#include "ionaddr/splitter.hpp"

namespace ionaddr::formats {

using nlohmann::json;

// Write to a sibling temp file and rename over the target. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Shortest round-trip decimal form; stable across runs.
std::string format_number(double v);

// position_m,intensity
std::string profile_csv(const IntensityProfile& profile);
json profile_json(const IntensityProfile& profile);

// Accepts "position,counts" rows with an optional header line. Positions must
// be uniformly spaced. Throws ConfigError naming the offending line.
IntensityProfile parse_profile_csv(std::string_view text);

// Binary P5 graymap, 8 or 16 bit (big-endian). Pixel pitch is left at zero
// for the caller to fill from the sidecar.
IntensityProfile parse_pgm(std::string_view bytes);
std::string encode_pgm(const IntensityProfile& profile, int max_value);

// channel,relative_power rows in channel order; header optional.
splitter::LeafPowers parse_leaf_powers_csv(std::string_view text);
std::string leaf_powers_csv(const splitter::LeafPowers& leaves);

json tree_json(const splitter::SplitterTree& tree);
splitter::SplitterTree tree_from_json(const json& j);

std::string balanced_curve_csv(std::span<const powerbudget::BalancedPoint> curve);
json balanced_curve_json(std::span<const powerbudget::BalancedPoint> curve);

std::string tolerance_csv(std::span<const diffraction::ToleranceRow> rows);
json tolerance_json(std::span<const diffraction::ToleranceRow> rows);
json tolerance_row_json(const diffraction::ToleranceRow& row);

json crosstalk_report_json(const profiles::CrosstalkReport& report);
json stage_solution_json(const pulsematch::StageSolution& s);

// Frames described by a sidecar: {"frames": [{"file", "exposure",
// "saturation_level"}], "pixel_pitch_m", ...}. Relative file names resolve
// against the sidecar's directory.
struct Sidecar {
  struct Frame {
    std::filesystem::path file;
    double exposure = 1.0;
    std::optional<double> saturation_level;  // PGM default: maxval
  };
  std::vector<Frame> frames;
  double pixel_pitch = 0.0;  // m, required for PGM frames
  double ion_pitch = 4e-6;   // m
  int neighbor_count = 1;
  profiles::NoiseModel noise;
  bool has_dark_region = false;
  profiles::IndexRange dark_region;
};

Sidecar parse_sidecar(std::string_view text, const std::filesystem::path& base_dir);

// Loads one frame (.csv or .pgm) and applies sidecar metadata.
IntensityProfile load_frame(const Sidecar& sidecar, const Sidecar::Frame& frame);

}  // namespace ionaddr::formats

#endif  // IONADDR_FORMATS_HPP
