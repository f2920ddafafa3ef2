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

#include "ionaddr/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ionaddr/beamopt.hpp"
#include "ionaddr/errors.hpp"
#include "ionaddr/formats.hpp"
#include "ionaddr/profiles.hpp"
#include "ionaddr/rng.hpp"
#include "ionaddr/splitter.hpp"

namespace ionaddr::cli {

namespace fs = std::filesystem;
using formats::json;
using std::numbers::pi;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void add_table(OutputSet& out, const Options& opt, const std::string& stem,
               const std::string& csv, const json& as_json) {
  if (opt.format == TableFormat::Csv)
    out.files.emplace_back(stem + ".csv", csv);
  else
    out.files.emplace_back(stem + ".json", dump(as_json));
}

template <typename T>
const T& require(const std::optional<T>& section, const char* what) {
  if (!section) throw ConfigError(std::string("scenario is missing the '") + what + "' section");
  return *section;
}

splitter::LeafPowers load_leaves(const SplitterSection& s) {
  switch (s.source) {
    case SplitterSection::Source::Synthetic:
      return splitter::synthetic_factor5_dataset();
    case SplitterSection::Source::MeasuredCsv:
      return formats::parse_leaf_powers_csv(formats::read_file(s.file)).normalize();
    case SplitterSection::Source::TreeJson: {
      json j;
      try {
        j = json::parse(formats::read_file(s.file));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("tree json: ") + e.what());
      }
      return splitter::forward_powers(formats::tree_from_json(j));
    }
  }
  return {};
}

int depth_for(std::size_t leaves) {
  int depth = 0;
  while ((std::size_t{1} << depth) < leaves) ++depth;
  if ((std::size_t{1} << depth) != leaves || depth == 0)
    throw ConfigError(fmt::format("channel count {} is not a power of two >= 2", leaves));
  return depth;
}

// Lagrange budget of the configured relay, using the Gaussian NA convention.
beamopt::LagrangeBudget relay_budget(const CrosstalkSection& c, double object_waist) {
  beamopt::GaussianBeamAxis obj;
  obj.wavelength = c.pupil.wavelength;
  obj.waist_radius = object_waist;
  return {c.geometry.fiber_pitch, obj.divergence(), c.geometry.ion_pitch,
          c.pupil.numerical_aperture};
}

json lagrange_json(const beamopt::LagrangeCheck& chk) {
  return {{"feasible", chk.feasible},
          {"source_invariant_m_rad", chk.source_invariant},
          {"target_invariant_m_rad", chk.target_invariant}};
}

json crosstalk_pair(const IntensityProfile& p, double pitch) {
  const double offs[] = {-pitch, pitch};
  const auto ct = diffraction::crosstalk_at(p, offs);
  return {{"left", ct[0]}, {"right", ct[1]}, {"max", std::max(ct[0], ct[1])}};
}

std::vector<diffraction::ToleranceRow> efl_table(const CrosstalkSection& c,
                                                 const ToleranceSection& t) {
  std::vector<diffraction::MlaPerturbation> perts;
  for (double dec : t.decenters)
    for (auto p : diffraction::efl_series(t.efl_start, t.efl_stop, t.efl_step)) {
      p.decenter = dec;
      perts.push_back(p);
    }
  return diffraction::mla_tolerance_sweep(c.geometry, c.pupil, c.grid, perts);
}

}  // namespace

OutputSet cmd_budget(const Scenario& sc, const Options& opt) {
  const auto& split = require(sc.splitter, "splitter");
  const auto& bud = require(sc.budget, "laser/losses");
  const splitter::LeafPowers leaves = load_leaves(split);

  powerbudget::ChannelBudget tmpl;
  tmpl.input_power = bud.input_power;
  tmpl.loss_chain = bud.losses;
  const auto curve = powerbudget::balanced_power_curve(leaves, tmpl);
  const auto best_k = powerbudget::max_channels_at(curve, bud.threshold_power);
  const auto rabi = powerbudget::RabiModel::calibrated(bud.rabi_power_ind, bud.rabi_power_glob,
                                                       2.0 * pi * bud.rabi_rate_hz);

  json channels = json::array();
  for (std::size_t i = 0; i < leaves.powers.size(); ++i) {
    powerbudget::ChannelBudget b = tmpl;
    b.split_fraction = leaves.powers[i];
    const auto d = powerbudget::delivered_power(b);
    channels.push_back({{"channel", i + 1},
                        {"split_fraction", leaves.powers[i]},
                        {"delivered_power_W", d.power},
                        {"delivered_power_low_W", d.power_low},
                        {"delivered_power_high_W", d.power_high}});
  }
  powerbudget::ChannelBudget uniform = tmpl;
  uniform.split_fraction = 1.0 / static_cast<double>(leaves.powers.size());
  const auto ud = powerbudget::delivered_power(uniform);

  json curve_json = json::array();
  for (const auto& pt : curve)
    curve_json.push_back({{"k", pt.included},
                          {"balanced_power_W", pt.balanced_power},
                          {"rabi_rate_hz", powerbudget::rabi_rate(rabi, pt.balanced_power,
                                                                  pt.balanced_power) / (2.0 * pi)}});

  json report = {
      {"scenario", sc.name},
      {"input_power_W", bud.input_power},
      {"chain_loss_dB", ud.total_loss_db},
      {"chain_uncertainty_dB", ud.uncertainty_db},
      {"uniform_split_delivered_W", ud.power},
      {"leaf_spread", leaves.spread()},
      {"channels", channels},
      {"threshold_power_W", bud.threshold_power},
      {"max_channels_at_threshold", best_k ? json(*best_k) : json(nullptr)},
      {"rabi_kappa_rad_per_s_per_W", rabi.kappa},
      {"balanced_curve", curve_json},
  };
  const double ict = 1e-4;
  const double eg = powerbudget::crosstalk_rabi_error(ict, powerbudget::BeamConfig::GlobalBeam);
  const double ed = powerbudget::crosstalk_rabi_error(ict, powerbudget::BeamConfig::DualIndividual);
  report["crosstalk_error_model"] = {
      {"intensity_crosstalk", ict},
      {"global_beam_rabi_error", eg},
      {"dual_individual_rabi_error", ed},
      {"global_beam_neighbor_rotation_rad", powerbudget::neighbor_rotation(true, eg)},
      {"dual_individual_neighbor_rotation_rad", powerbudget::neighbor_rotation(true, ed)}};

  if (split.thermal_range) {
    splitter::SplitterTree tree = splitter::fit_tree(leaves, depth_for(leaves.powers.size()));
    tree.reference_temp = split.reference_temp;
    const auto pattern = splitter::default_thermal_pattern(tree.depth);
    tree = splitter::calibrate_thermal(tree, pattern, *split.thermal_range, split.thermal_target);
    report["thermal"] = {{"min_temp_c", split.thermal_range->first},
                         {"max_temp_c", split.thermal_range->second},
                         {"max_relative_change",
                          splitter::thermal_sensitivity(tree, *split.thermal_range)},
                         {"coupler_coeff_scale_per_c", std::abs(tree.couplers[0].thermal_coeff)}};
  }

  OutputSet out;
  out.files.emplace_back("budget.json", dump(report));
  add_table(out, opt, "balanced_curve", formats::balanced_curve_csv(curve),
            formats::balanced_curve_json(curve));
  out.summary = fmt::format("budget: chain loss {} dB, {} channel(s) reach {} W", ud.total_loss_db,
                            best_k ? std::to_string(*best_k) : std::string("no"),
                            bud.threshold_power);
  return out;
}

OutputSet cmd_crosstalk(const Scenario& sc, const Options& opt) {
  const auto& c = require(sc.crosstalk, "geometry/pupil");
  const auto& g = c.geometry;

  const auto bare = beamopt::lagrange_feasible(relay_budget(c, g.fiber_waist));
  const auto expanded = beamopt::lagrange_feasible(relay_budget(c, g.object_waist));
  if (!expanded.feasible)
    throw InfeasibleError(fmt::format(
        "Lagrange budget infeasible: source {} > target {} m*rad",
        expanded.source_invariant, expanded.target_invariant));

  const diffraction::Grid grid = diffraction::chain_grid(g, c.grid);
  const auto illum = g.illumination(c.pupil);
  const auto psf = diffraction::psf_1d(c.pupil, illum, grid);

  json report = {
      {"scenario", sc.name},
      {"lagrange_bare_fiber", lagrange_json(bare)},
      {"lagrange_expanded", lagrange_json(expanded)},
      {"image_waist_m", g.image_waist()},
      {"pupil_fill", illum.fill},
      {"crosstalk", crosstalk_pair(psf, g.ion_pitch)},
  };
  if (c.match_measured) {
    const double s = diffraction::solve_spherical_for_crosstalk(c.pupil, illum, grid, g.ion_pitch,
                                                                c.crosstalk_target);
    diffraction::PupilSpec matched = c.pupil;
    matched.aberrations.spherical = s;
    report["matched"] = {{"target", c.crosstalk_target},
                         {"spherical_waves", s},
                         {"crosstalk", crosstalk_pair(diffraction::psf_1d(matched, illum, grid),
                                                      g.ion_pitch)}};
  }

  // Each interior site dark with both neighbours lit.
  json sites = json::array();
  for (int i = 1; i <= g.channel_count; ++i) {
    std::vector<int> lit;
    if (i > 1) lit.push_back(i - 1);
    if (i < g.channel_count) lit.push_back(i + 1);
    if (lit.empty()) continue;
    const auto map = diffraction::chain_intensity_map(g, c.pupil, lit, c.grid);
    sites.push_back({{"site", i}, {"neighbours_on", lit},
                     {"crosstalk", map.site_crosstalk[static_cast<std::size_t>(i - 1)]}});
  }
  report["neighbour_sites"] = sites;

  // Crop the spot to the chain extent plus two pitches.
  const double half_span = (0.5 * g.channel_count + 2.0) * g.ion_pitch;
  IntensityProfile cropped = psf;
  {
    const auto center = static_cast<long>(grid.size / 2);
    const long half = std::min<long>(center - 1, std::lround(half_span / grid.sample_spacing));
    cropped.samples.assign(psf.samples.begin() + (center - half),
                           psf.samples.begin() + (center + half + 1));
    cropped.width = cropped.samples.size();
    cropped.origin = psf.position(static_cast<std::size_t>(center - half));
  }

  OutputSet out;
  add_table(out, opt, "psf", formats::profile_csv(cropped), formats::profile_json(cropped));
  if (sc.tolerance) {
    const auto rows = efl_table(c, *sc.tolerance);
    report["best_efl"] = formats::tolerance_row_json(diffraction::select_best_efl(rows));
    add_table(out, opt, "tolerance_table", formats::tolerance_csv(rows),
              formats::tolerance_json(rows));
  }
  out.files.emplace(out.files.begin() + 1, "crosstalk.json", dump(report));
  out.summary = fmt::format("crosstalk: {} at +-{} m",
                            report["crosstalk"]["max"].get<double>(), g.ion_pitch);
  return out;
}

OutputSet cmd_tolerance(const Scenario& sc, const Options& opt) {
  const auto& c = require(sc.crosstalk, "geometry/pupil");
  const auto& t = require(sc.tolerance, "tolerance");
  const auto rows = efl_table(c, t);
  const auto best = diffraction::select_best_efl(rows);

  json report = {{"scenario", sc.name},
                 {"design_efl_m", diffraction::design_efl(c.geometry, c.pupil.wavelength)},
                 {"rows", rows.size()},
                 {"best", formats::tolerance_row_json(best)}};
  OutputSet out;
  add_table(out, opt, "tolerance_table", formats::tolerance_csv(rows), formats::tolerance_json(rows));

  if (t.samples > 0) {
    const auto seed = opt.seed ? opt.seed : sc.seed;
    if (!seed) throw ConfigError("tolerance: monte_carlo_samples > 0 requires a seed");
    diffraction::MlaPerturbation nominal = best.perturbation;
    nominal.decenter = 0.0;
    const auto draws = diffraction::sample_perturbations(
        nominal, {t.efl_sigma, t.decenter_sigma}, t.samples, substream_seed(*seed, "tolerance"));
    const auto mc = diffraction::mla_tolerance_sweep(c.geometry, c.pupil, c.grid, draws);
    std::vector<double> xt;
    for (const auto& r : mc) xt.push_back(r.crosstalk());
    std::sort(xt.begin(), xt.end());
    double mean = 0.0;
    for (double v : xt) mean += v;
    mean /= static_cast<double>(xt.size());
    const auto q = [&](double f) {
      return xt[std::min(xt.size() - 1, static_cast<std::size_t>(std::floor(f * static_cast<double>(xt.size()))))];
    };
    report["monte_carlo"] = {{"samples", t.samples},
                             {"seed", *seed},
                             {"efl_sigma_m", t.efl_sigma},
                             {"decenter_sigma_m", t.decenter_sigma},
                             {"mean_crosstalk", mean},
                             {"median_crosstalk", q(0.5)},
                             {"p95_crosstalk", q(0.95)},
                             {"max_crosstalk", xt.back()}};
    add_table(out, opt, "monte_carlo", formats::tolerance_csv(mc), formats::tolerance_json(mc));
  }
  out.files.emplace(out.files.begin(), "tolerance.json", dump(report));
  out.summary = fmt::format("tolerance: best EFL {} m with crosstalk {}", best.perturbation.efl,
                            best.crosstalk());
  return out;
}

OutputSet cmd_pathmatch(const Scenario& sc, const Options& opt) {
  const auto& p = require(sc.paths, "pulse/stage/paths");
  json stages = json::array();
  for (const auto& path : p.paths)
    stages.push_back(formats::stage_solution_json(pulsematch::optimize_stage(path, p.pulse)));
  const auto plan = pulsematch::splice_plan(p.paths, p.pulse, p.visibility_floor);

  json entries = json::array();
  for (const auto& e : plan.entries)
    entries.push_back({{"channel", e.channel}, {"splice_adjustment_m", e.splice_adjustment}});
  json after = json::array();
  double worst_v = 1.0;
  const pulsematch::StageSolution* fringe_src = nullptr;
  for (const auto& s : plan.stages) {
    after.push_back(formats::stage_solution_json(s));
    worst_v = std::min(worst_v, s.visibility);
    if (p.fringe_channel == s.channel) fringe_src = &s;
  }
  if (!fringe_src) {
    if (p.fringe_channel != 0)
      throw ConfigError(fmt::format("fringes.channel {} is not listed in paths", p.fringe_channel));
    fringe_src = &*std::min_element(plan.stages.begin(), plan.stages.end(),
                                    [](const auto& a, const auto& b) { return a.visibility < b.visibility; });
  }

  json positions = {{"scenario", sc.name},
                    {"pulse_length_m", p.pulse.length()},
                    {"stage_travel_m", p.stage.travel},
                    {"stage_resolution_m", p.stage.resolution},
                    {"stages", stages}};
  json splice = {{"visibility_floor", p.visibility_floor},
                 {"entries", entries},
                 {"stages_after_splice", after},
                 {"min_visibility", worst_v}};
  const auto fringes = pulsematch::fringe_pattern(p.pulse, fringe_src->residual, p.fringe_angle);

  OutputSet out;
  out.files.emplace_back("stage_positions.json", dump(positions));
  out.files.emplace_back("splice_plan.json", dump(splice));
  add_table(out, opt, "fringes", formats::profile_csv(fringes), formats::profile_json(fringes));
  out.summary = fmt::format("pathmatch: {} splice(s), min visibility {}", plan.entries.size(), worst_v);
  return out;
}

OutputSet cmd_fit_splitter(const fs::path& measured, const Options&) {
  const auto leaves = formats::parse_leaf_powers_csv(formats::read_file(measured));
  const int depth = depth_for(leaves.powers.size());
  const auto tree = splitter::fit_tree(leaves, depth);
  const auto back = splitter::forward_powers(tree);
  const auto norm = leaves.normalize();
  double worst = 0.0;
  for (std::size_t i = 0; i < back.powers.size(); ++i)
    worst = std::max(worst, std::abs(back.powers[i] - norm.powers[i]));
  json j = formats::tree_json(tree);
  j["round_trip_max_abs_error"] = worst;
  j["leaf_spread"] = norm.spread();
  OutputSet out;
  out.files.emplace_back("fitted_tree.json", dump(j));
  out.summary = fmt::format("fit-splitter: depth {} tree, spread {}", depth, norm.spread());
  return out;
}

OutputSet cmd_profile_analyze(const fs::path& sidecar_path, const Options& opt) {
  const auto base = sidecar_path.has_parent_path() ? sidecar_path.parent_path() : fs::path(".");
  const auto sc = formats::parse_sidecar(formats::read_file(sidecar_path), base);
  profiles::ExposureStack stack;
  for (const auto& f : sc.frames) stack.frames.push_back(formats::load_frame(sc, f));
  std::sort(stack.frames.begin(), stack.frames.end(),
            [](const auto& a, const auto& b) { return a.exposure < b.exposure; });
  const IntensityProfile stitched = profiles::hdr_stitch(stack).row_through_peak();
  std::optional<profiles::IndexRange> dark;
  if (sc.has_dark_region) dark = sc.dark_region;
  const auto rep = profiles::extract_crosstalk(stitched, sc.ion_pitch, sc.neighbor_count, sc.noise, dark);

  json j = formats::crosstalk_report_json(rep);
  j["frames"] = sc.frames.size();
  j["beam_radius_m"] = profiles::beam_radius(stitched);
  OutputSet out;
  out.files.emplace_back("crosstalk_report.json", dump(j));
  add_table(out, opt, "stitched_profile", formats::profile_csv(stitched),
            formats::profile_json(stitched));
  out.summary = fmt::format("profile-analyze: worst neighbour ratio {}",
                            std::max(rep.ratios.front().ratio, rep.ratios.back().ratio));
  return out;
}

int run(const std::string& verb, const Options& opt, std::ostream& out, std::ostream& err) {
  try {
    OutputSet result;
    std::optional<Scenario> sc;
    auto scenario = [&]() -> const Scenario& {
      if (!sc) {
        if (!opt.scenario) throw ConfigError(verb + " requires --scenario <file>");
        sc = load_scenario(*opt.scenario);
        if (opt.seed) sc->seed = opt.seed;
      }
      return *sc;
    };

    if (verb == "budget") {
      result = cmd_budget(scenario(), opt);
    } else if (verb == "crosstalk") {
      result = cmd_crosstalk(scenario(), opt);
    } else if (verb == "tolerance") {
      result = cmd_tolerance(scenario(), opt);
    } else if (verb == "pathmatch") {
      result = cmd_pathmatch(scenario(), opt);
    } else if (verb == "fit-splitter") {
      fs::path measured;
      if (opt.measured) {
        measured = *opt.measured;
      } else {
        const auto& s = scenario();
        if (!s.splitter || s.splitter->source != SplitterSection::Source::MeasuredCsv)
          throw ConfigError("fit-splitter requires --measured <csv> or a measured_csv splitter");
        measured = s.splitter->file;
      }
      result = cmd_fit_splitter(measured, opt);
    } else if (verb == "profile-analyze") {
      fs::path sidecar;
      if (opt.sidecar) {
        sidecar = *opt.sidecar;
      } else {
        const auto& s = scenario();
        if (!s.profile_sidecar)
          throw ConfigError("profile-analyze requires --sidecar <json> or profile.sidecar");
        sidecar = *s.profile_sidecar;
      }
      result = cmd_profile_analyze(sidecar, opt);
    } else {
      throw ConfigError("unknown command '" + verb + "'");
    }

    fs::path dir = opt.out ? *opt.out : (sc ? sc->output_dir : fs::path("out"));
    for (const auto& [name, content] : result.files) formats::write_file_atomic(dir / name, content);
    out << result.summary << "\n";
    for (const auto& f : result.files) out << "  wrote " << (dir / f.first).string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace ionaddr::cli
