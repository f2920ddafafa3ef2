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

// Command-line front end: composes the modules into scenario-driven reports.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ionaddr/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Design and analysis toolkit for a guided-light ion addressing chain"};
  app.require_subcommand(1);

  ionaddr::cli::Options opt;
  std::string scenario, out, format = "csv", measured, sidecar;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario, "scenario YAML file");
    sub->add_option("--out", out, "output directory (overrides the scenario)");
    sub->add_option("--seed", seed, "random seed (overrides the scenario)");
    sub->add_option("--format", format, "format of tabular outputs")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  struct Verb {
    const char* name;
    const char* help;
  };
  const Verb verbs[] = {
      {"budget", "power ledger and balanced-power curve"},
      {"crosstalk", "ion-plane spot, neighbour crosstalk and optional EFL sweep"},
      {"pathmatch", "delay-stage settings, splice plan and fringe pattern"},
      {"fit-splitter", "fit a coupler tree to measured channel powers"},
      {"profile-analyze", "stitch an exposure stack and extract crosstalk"},
      {"tolerance", "MLA focal-length sweep and Monte Carlo tolerancing"},
  };
  for (const auto& v : verbs) {
    auto* sub = app.add_subcommand(v.name, v.help);
    add_common(sub);
    if (std::string(v.name) == "fit-splitter")
      sub->add_option("--measured", measured, "CSV of channel,relative_power");
    if (std::string(v.name) == "profile-analyze")
      sub->add_option("--sidecar", sidecar, "JSON sidecar listing frames");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ionaddr::cli::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (!scenario.empty()) opt.scenario = scenario;
  if (!out.empty()) opt.out = out;
  if (sub->count("--seed")) opt.seed = seed;
  opt.format = format == "json" ? ionaddr::cli::TableFormat::Json : ionaddr::cli::TableFormat::Csv;
  if (!measured.empty()) opt.measured = measured;
  if (!sidecar.empty()) opt.sidecar = sidecar;

  return ionaddr::cli::run(sub->get_name(), opt, std::cout, std::cerr);
}
