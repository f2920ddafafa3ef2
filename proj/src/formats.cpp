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

#include "ionaddr/formats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <tuple>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "ionaddr/errors.hpp"

namespace ionaddr::formats {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::string profile_csv(const IntensityProfile& profile) {
  const IntensityProfile row = profile.row_through_peak();
  std::string out = "position_m,intensity\n";
  for (std::size_t i = 0; i < row.width; ++i)
    out += fmt::format("{},{}\n", row.position(i), row.samples[i]);
  return out;
}

json profile_json(const IntensityProfile& profile) {
  const IntensityProfile row = profile.row_through_peak();
  json pos = json::array(), val = json::array();
  for (std::size_t i = 0; i < row.width; ++i) {
    pos.push_back(row.position(i));
    val.push_back(row.samples[i]);
  }
  return {{"position_m", pos}, {"intensity", val}};
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

// Numeric rows of a two-column CSV with line numbers; the first line may be a
// header.
std::vector<std::tuple<std::size_t, double, double>> numeric_rows(std::string_view text,
                                                                   std::string_view what) {
  std::vector<std::tuple<std::size_t, double, double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first_content = true;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (line.front() == '#') continue;
    const auto fields = split_fields(line);
    double a = 0.0, b = 0.0;
    const bool ok = fields.size() >= 2 && parse_double(fields[0], a) && parse_double(fields[1], b);
    if (!ok) {
      if (first_content) {
        first_content = false;
        continue;  // header
      }
      throw ConfigError(fmt::format("{} line {}: expected two numeric columns", what, line_no));
    }
    first_content = false;
    rows.emplace_back(line_no, a, b);
  }
  return rows;
}

}  // namespace

IntensityProfile parse_profile_csv(std::string_view text) {
  const auto rows = numeric_rows(text, "profile csv");
  if (rows.size() < 3) throw ConfigError("profile csv needs at least 3 rows");
  std::vector<double> values;
  values.reserve(rows.size());
  const double x0 = std::get<1>(rows.front());
  const double pitch = (std::get<1>(rows.back()) - x0) / static_cast<double>(rows.size() - 1);
  if (!(pitch > 0.0)) throw ConfigError("profile csv positions must increase");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [line, x, v] = rows[i];
    if (std::abs(x - (x0 + static_cast<double>(i) * pitch)) > 1e-6 * pitch)
      throw ConfigError(fmt::format("profile csv line {}: positions must be uniformly spaced", line));
    if (v < 0.0)
      throw ConfigError(fmt::format("profile csv line {}: negative intensity", line));
    values.push_back(v);
  }
  return IntensityProfile::make_1d(std::move(values), pitch, x0);
}

IntensityProfile parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    const auto res = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), v);
    if (res.ec != std::errc{} || v <= 0) throw ConfigError("malformed PGM header");
    pos = static_cast<std::size_t>(res.ptr - bytes.data());
    return v;
  };
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5")
    throw ConfigError("not a binary PGM (P5) file");
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (maxval > 65535) throw ConfigError("PGM maxval above 65535");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw ConfigError("malformed PGM header");
  ++pos;
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < count * bpp) throw ConfigError("PGM pixel data truncated");
  IntensityProfile out;
  out.width = static_cast<std::size_t>(width);
  out.height = static_cast<std::size_t>(height);
  out.samples.resize(count);
  out.saturation_level = static_cast<double>(maxval);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i)
    out.samples[i] = bpp == 1 ? data[i] : static_cast<double>((data[2 * i] << 8) | data[2 * i + 1]);
  return out;
}

std::string encode_pgm(const IntensityProfile& profile, int max_value) {
  if (max_value < 1 || max_value > 65535) throw DomainError("PGM maxval must be in 1..65535");
  std::string out = fmt::format("P5\n{} {}\n{}\n", profile.width, profile.height, max_value);
  for (double v : profile.samples) {
    const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, static_cast<long>(max_value)));
    if (max_value < 256) {
      out.push_back(static_cast<char>(q));
    } else {
      out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xff));
    }
  }
  return out;
}

splitter::LeafPowers parse_leaf_powers_csv(std::string_view text) {
  const auto rows = numeric_rows(text, "measured csv");
  splitter::LeafPowers out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [line, ch, p] = rows[i];
    if (ch != static_cast<double>(i + 1))
      throw ConfigError(fmt::format("measured csv line {}: expected channel {}", line, i + 1));
    if (!(p > 0.0))
      throw ConfigError(fmt::format("measured csv line {}: relative power must be positive", line));
    out.powers.push_back(p);
  }
  if (out.powers.empty()) throw ConfigError("measured csv has no data rows");
  return out;
}

std::string leaf_powers_csv(const splitter::LeafPowers& leaves) {
  std::string out = "channel,relative_power\n";
  for (std::size_t i = 0; i < leaves.powers.size(); ++i)
    out += fmt::format("{},{}\n", i + 1, leaves.powers[i]);
  return out;
}

json tree_json(const splitter::SplitterTree& tree) {
  json couplers = json::array();
  for (std::size_t i = 0; i < tree.couplers.size(); ++i)
    couplers.push_back({{"index", i},
                        {"split_fraction", tree.couplers[i].split_fraction},
                        {"thermal_coeff_per_c", tree.couplers[i].thermal_coeff}});
  return {{"depth", tree.depth},
          {"reference_temp_c", tree.reference_temp},
          {"input_mfd_m", tree.input_mfd},
          {"max_input_power_w", tree.max_input_power},
          {"couplers", couplers}};
}

splitter::SplitterTree tree_from_json(const json& j) {
  try {
    splitter::SplitterTree t = splitter::SplitterTree::balanced(j.at("depth").get<int>());
    t.reference_temp = j.value("reference_temp_c", t.reference_temp);
    t.input_mfd = j.value("input_mfd_m", t.input_mfd);
    t.max_input_power = j.value("max_input_power_w", t.max_input_power);
    const auto& cs = j.at("couplers");
    if (cs.size() != t.couplers.size())
      throw ConfigError("tree json: coupler count does not match depth");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      t.couplers[i].split_fraction = cs[i].at("split_fraction").get<double>();
      t.couplers[i].thermal_coeff = cs[i].value("thermal_coeff_per_c", 0.0);
    }
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("tree json: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("tree json: ") + e.what());
  }
}

std::string balanced_curve_csv(std::span<const powerbudget::BalancedPoint> curve) {
  std::string out = "k,balanced_power_W\n";
  for (const auto& p : curve) out += fmt::format("{},{}\n", p.included, p.balanced_power);
  return out;
}

json balanced_curve_json(std::span<const powerbudget::BalancedPoint> curve) {
  json arr = json::array();
  for (const auto& p : curve)
    arr.push_back({{"k", p.included}, {"balanced_power_W", p.balanced_power}, {"channels", p.channels}});
  return arr;
}

std::string tolerance_csv(std::span<const diffraction::ToleranceRow> rows) {
  std::string out =
      "efl_m,efl_error_m,decenter_m,image_waist_m,fill,pupil_offset,defocus_waves,"
      "crosstalk_left,crosstalk_right,crosstalk\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.perturbation.efl,
                       r.perturbation.efl_error, r.perturbation.decenter, r.image_waist,
                       r.fill, r.pupil_offset, r.defocus_waves, r.crosstalk_left,
                       r.crosstalk_right, r.crosstalk());
  return out;
}

json tolerance_row_json(const diffraction::ToleranceRow& r) {
  return {{"efl_m", r.perturbation.efl},
          {"efl_error_m", r.perturbation.efl_error},
          {"decenter_m", r.perturbation.decenter},
          {"image_waist_m", r.image_waist},
          {"fill", r.fill},
          {"pupil_offset", r.pupil_offset},
          {"defocus_waves", r.defocus_waves},
          {"crosstalk_left", r.crosstalk_left},
          {"crosstalk_right", r.crosstalk_right},
          {"crosstalk", r.crosstalk()}};
}

json tolerance_json(std::span<const diffraction::ToleranceRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(tolerance_row_json(r));
  return arr;
}

json crosstalk_report_json(const profiles::CrosstalkReport& report) {
  json ratios = json::array();
  for (const auto& r : report.ratios)
    ratios.push_back({{"offset_m", r.offset},
                      {"ratio", r.ratio},
                      {"uncertainty", r.uncertainty},
                      {"below_noise_floor", r.below_noise_floor}});
  return {{"peak_position_m", report.peak_position},
          {"peak_value", report.peak_value},
          {"noise_floor", report.noise_floor},
          {"ratios", ratios}};
}

json stage_solution_json(const pulsematch::StageSolution& s) {
  return {{"channel", s.channel},
          {"position_m", s.position},
          {"residual_m", s.residual},
          {"visibility", s.visibility},
          {"out_of_range", s.out_of_range}};
}

Sidecar parse_sidecar(std::string_view text, const fs::path& base_dir) {
  Sidecar sc;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sidecar: ") + e.what());
  }
  try {
    const auto& frames = j.at("frames");
    if (!frames.is_array() || frames.empty()) throw ConfigError("sidecar: 'frames' must be a non-empty array");
    for (const auto& f : frames) {
      Sidecar::Frame fr;
      fr.file = f.at("file").get<std::string>();
      if (fr.file.is_relative()) fr.file = base_dir / fr.file;
      fr.exposure = f.at("exposure").get<double>();
      if (f.contains("saturation_level")) fr.saturation_level = f.at("saturation_level").get<double>();
      sc.frames.push_back(fr);
    }
    sc.pixel_pitch = j.value("pixel_pitch_m", 0.0);
    sc.ion_pitch = j.value("ion_pitch_m", sc.ion_pitch);
    sc.neighbor_count = j.value("neighbor_count", sc.neighbor_count);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      sc.noise.dark_noise = n.value("dark_noise_counts", 0.0);
      sc.noise.read_noise = n.value("read_noise_counts", 0.0);
      sc.noise.shot_noise = n.value("shot_noise", false);
    }
    if (j.contains("dark_region")) {
      const auto& d = j.at("dark_region");
      if (!d.is_array() || d.size() != 2) throw ConfigError("sidecar: 'dark_region' must be [first, last)");
      sc.has_dark_region = true;
      sc.dark_region = {d[0].get<std::size_t>(), d[1].get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sidecar: ") + e.what());
  }
  return sc;
}

IntensityProfile load_frame(const Sidecar& sidecar, const Sidecar::Frame& frame) {
  const std::string bytes = read_file(frame.file);
  IntensityProfile p;
  const auto ext = frame.file.extension().string();
  if (ext == ".pgm") {
    p = parse_pgm(bytes);
    if (!(sidecar.pixel_pitch > 0.0))
      throw ConfigError("sidecar: pixel_pitch_m is required for PGM frames");
    p.pixel_pitch = sidecar.pixel_pitch;
  } else {
    p = parse_profile_csv(bytes);
    if (!frame.saturation_level)
      throw ConfigError("sidecar: saturation_level is required for CSV frame " + frame.file.string());
  }
  p.exposure = frame.exposure;
  if (frame.saturation_level) p.saturation_level = *frame.saturation_level;
  return p;
}

}  // namespace ionaddr::formats
