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

#include "ionaddr/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fmt/format.h>

#include "ionaddr/errors.hpp"
#include "ionaddr/formats.hpp"

namespace ionaddr {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  if (mark.line >= 0)
    throw ConfigError(fmt::format("scenario line {}: {}", mark.line + 1, msg));
  throw ConfigError("scenario: " + msg);
}

// Typed access into one mapping, carrying the dotted path for messages.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename T>
  T get(const std::string& key) const {
    const YAML::Node v = node_[key];
    if (!v) fail(node_, "missing required field '" + key_path(key) + "'");
    return convert<T>(v, key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    const YAML::Node v = node_[key];
    if (!v) return fallback;
    return convert<T>(v, key);
  }

  double positive(const std::string& key) const {
    const double v = get<double>(key);
    if (!(v > 0.0)) fail(node_[key], "'" + key_path(key) + "' must be positive");
    return v;
  }

  Section child(const std::string& key) const {
    const YAML::Node v = node_[key];
    if (!v) fail(node_, "missing required section '" + key_path(key) + "'");
    return {v, key_path(key)};
  }

  YAML::Node raw(const std::string& key) const { return node_[key]; }
  const YAML::Node& node() const { return node_; }

 private:
  template <typename T>
  T convert(const YAML::Node& v, const std::string& key) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, "field '" + key_path(key) + "' has the wrong type");
    }
  }

  YAML::Node node_;
  std::string path_;
};

SplitterSection read_splitter(const Section& s, const fs::path& base) {
  SplitterSection out;
  const auto source = s.get<std::string>("source");
  if (source == "synthetic_factor5") {
    out.source = SplitterSection::Source::Synthetic;
  } else if (source == "measured_csv") {
    out.source = SplitterSection::Source::MeasuredCsv;
    out.file = base / s.get<std::string>("file");
  } else if (source == "tree_json") {
    out.source = SplitterSection::Source::TreeJson;
    out.file = base / s.get<std::string>("file");
  } else {
    fail(s.raw("source"), "splitter.source must be synthetic_factor5, measured_csv or tree_json");
  }
  if (out.source != SplitterSection::Source::Synthetic && !fs::exists(out.file))
    fail(s.raw("file"), "splitter.file does not exist: " + out.file.string());
  out.reference_temp = s.get_or<double>("reference_temp_c", out.reference_temp);
  if (s.has("thermal")) {
    const Section t = s.child("thermal");
    const double lo = t.get<double>("min_temp_c");
    const double hi = t.get<double>("max_temp_c");
    if (!(lo < hi)) fail(t.node(), "splitter.thermal range must satisfy min < max");
    out.thermal_range = {lo, hi};
    out.thermal_target = t.positive("max_relative_change");
  }
  return out;
}

BudgetSection read_budget(const Section& laser, const YAML::Node& losses,
                          const std::optional<Section>& rabi) {
  BudgetSection out;
  out.input_power = laser.positive("input_power_w");
  out.threshold_power = laser.get_or<double>("threshold_power_w", out.threshold_power);
  if (!losses.IsSequence() || losses.size() == 0) fail(losses, "'losses' must be a non-empty list");
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const Section e(losses[i], fmt::format("losses[{}]", i));
    powerbudget::LossElement el;
    el.name = e.get<std::string>("name");
    el.insertion_loss_db = e.get<double>("loss_db");
    el.uncertainty_db = e.get<double>("uncertainty_db");
    if (el.insertion_loss_db < 0.0) fail(e.raw("loss_db"), "'" + e.key_path("loss_db") + "' must be >= 0");
    if (el.uncertainty_db < 0.0)
      fail(e.raw("uncertainty_db"), "'" + e.key_path("uncertainty_db") + "' must be >= 0");
    out.losses.push_back(el);
  }
  if (rabi) {
    out.rabi_power_ind = rabi->positive("power_individual_w");
    out.rabi_power_glob = rabi->positive("power_global_w");
    out.rabi_rate_hz = rabi->positive("rate_hz");
  }
  return out;
}

CrosstalkSection read_crosstalk(const Section& geom, const Section& pupil,
                                const std::optional<Section>& grid) {
  CrosstalkSection out;
  auto& g = out.geometry;
  g.channel_count = geom.get<int>("channel_count");
  if (g.channel_count < 1) fail(geom.raw("channel_count"), "'geometry.channel_count' must be >= 1");
  g.ion_pitch = geom.positive("ion_pitch_m");
  g.demagnification = geom.positive("demagnification");
  g.object_waist = geom.positive("object_waist_m");
  g.fiber_waist = geom.positive("fiber_waist_m");
  g.fiber_pitch = geom.positive("fiber_pitch_m");

  auto& p = out.pupil;
  p.numerical_aperture = pupil.positive("numerical_aperture");
  if (p.numerical_aperture >= 1.0) fail(pupil.raw("numerical_aperture"), "'pupil.numerical_aperture' must be < 1");
  p.wavelength = pupil.positive("wavelength_m");
  if (pupil.has("aberrations_waves")) {
    const Section a = pupil.child("aberrations_waves");
    p.aberrations.defocus = a.get_or<double>("defocus", 0.0);
    p.aberrations.spherical = a.get_or<double>("spherical", 0.0);
    p.aberrations.coma = a.get_or<double>("coma", 0.0);
    p.aberrations.astigmatism = a.get_or<double>("astigmatism", 0.0);
  }
  out.match_measured = pupil.get_or<bool>("match_measured_crosstalk", false);
  out.crosstalk_target = pupil.get_or<double>("measured_crosstalk", out.crosstalk_target);
  if (grid) {
    out.grid.sample_spacing = grid->positive("sample_spacing_m");
    const int size = grid->get<int>("size");
    if (size < 64 || size % 2) fail(grid->raw("size"), "'grid.size' must be even and >= 64");
    out.grid.size = static_cast<std::size_t>(size);
  }
  return out;
}

ToleranceSection read_tolerance(const Section& t) {
  ToleranceSection out;
  out.efl_start = t.positive("efl_start_m");
  out.efl_stop = t.positive("efl_stop_m");
  out.efl_step = t.positive("efl_step_m");
  if (out.efl_stop < out.efl_start) fail(t.node(), "'tolerance.efl_stop_m' must be >= efl_start_m");
  if (t.has("decenters_m")) out.decenters = t.get<std::vector<double>>("decenters_m");
  if (out.decenters.empty()) fail(t.raw("decenters_m"), "'tolerance.decenters_m' must not be empty");
  const int samples = t.get_or<int>("monte_carlo_samples", 0);
  if (samples < 0) fail(t.raw("monte_carlo_samples"), "'tolerance.monte_carlo_samples' must be >= 0");
  out.samples = static_cast<std::size_t>(samples);
  out.efl_sigma = t.get_or<double>("efl_sigma_m", 0.0);
  out.decenter_sigma = t.get_or<double>("decenter_sigma_m", 0.0);
  if (out.efl_sigma < 0.0 || out.decenter_sigma < 0.0)
    fail(t.node(), "tolerance sigmas must be >= 0");
  return out;
}

PathSection read_paths(const Section& pulse, const Section& stage, const YAML::Node& paths,
                       const Section& root) {
  PathSection out;
  out.pulse.duration_fwhm = pulse.positive("duration_fwhm_s");
  out.pulse.wavelength = pulse.positive("wavelength_m");
  out.pulse.propagation_speed =
      pulse.get_or<double>("propagation_speed_m_per_s", pulsematch::kSpeedOfLight);
  if (!(out.pulse.propagation_speed > 0.0))
    fail(pulse.raw("propagation_speed_m_per_s"), "'pulse.propagation_speed_m_per_s' must be positive");
  out.stage.travel = stage.positive("travel_m");
  out.stage.resolution = stage.positive("resolution_m");
  if (out.stage.resolution > out.stage.travel)
    fail(stage.raw("resolution_m"), "'stage.resolution_m' must not exceed travel_m");
  out.reference_length = stage.get_or<double>("reference_length_m", 0.0);
  if (!paths.IsSequence() || paths.size() == 0) fail(paths, "'paths' must be a non-empty list");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Section p(paths[i], fmt::format("paths[{}]", i));
    pulsematch::ChannelPath cp;
    cp.channel = p.get<int>("channel");
    cp.static_offset = p.get<double>("static_offset_m");
    cp.splice_adjustment = p.get_or<double>("splice_adjustment_m", 0.0);
    cp.stage = out.stage;
    cp.reference_length = out.reference_length;
    out.paths.push_back(cp);
  }
  out.visibility_floor = root.get<double>("visibility_floor");
  if (!(out.visibility_floor > 0.0 && out.visibility_floor < 1.0))
    fail(root.raw("visibility_floor"), "'visibility_floor' must lie in (0, 1)");
  if (root.has("fringes")) {
    const Section f = root.child("fringes");
    out.fringe_angle = f.positive("angle_rad");
    out.fringe_channel = f.get_or<int>("channel", 0);
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const fs::path& base_dir) {
  YAML::Node root_node;
  try {
    root_node = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("scenario line {}: {}", e.mark.line + 1, e.msg));
  }
  if (!root_node || !root_node.IsMap()) throw ConfigError("scenario: top level must be a mapping");
  const Section root(root_node, "");

  Scenario sc;
  sc.base_dir = base_dir;
  sc.name = root.get<std::string>("name");
  if (root.has("seed")) sc.seed = root.get<std::uint64_t>("seed");
  sc.output_dir = base_dir / root.get_or<std::string>("output_dir", "out");

  if (root.has("splitter")) sc.splitter = read_splitter(root.child("splitter"), base_dir);
  if (root.has("laser") || root.has("losses")) {
    std::optional<Section> rabi;
    if (root.has("rabi")) rabi = root.child("rabi");
    const Section laser = root.child("laser");
    if (!root.has("losses")) fail(root_node, "missing required field 'losses'");
    sc.budget = read_budget(laser, root.raw("losses"), rabi);
  }
  if (root.has("geometry") || root.has("pupil")) {
    std::optional<Section> grid;
    if (root.has("grid")) grid = root.child("grid");
    sc.crosstalk = read_crosstalk(root.child("geometry"), root.child("pupil"), grid);
  }
  if (root.has("tolerance")) sc.tolerance = read_tolerance(root.child("tolerance"));
  if (root.has("pulse") || root.has("paths")) {
    if (!root.has("paths")) fail(root_node, "missing required field 'paths'");
    sc.paths = read_paths(root.child("pulse"), root.child("stage"), root.raw("paths"), root);
  }
  if (root.has("profile")) {
    const Section p = root.child("profile");
    fs::path sidecar = base_dir / p.get<std::string>("sidecar");
    if (!fs::exists(sidecar)) fail(p.raw("sidecar"), "profile.sidecar does not exist: " + sidecar.string());
    sc.profile_sidecar = sidecar;
  }
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  const std::string text = formats::read_file(path);
  return parse_scenario(text, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

}  // namespace ionaddr
