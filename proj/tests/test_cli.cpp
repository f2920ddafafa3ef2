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

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "ionaddr/formats.hpp"
#include "ionaddr/profiles.hpp"

namespace fs = std::filesystem;
using ionaddr::formats::json;
using ionaddr::formats::read_file;
using ionaddr::formats::write_file_atomic;

namespace {

const fs::path kScenarios = IONADDR_SCENARIO_DIR;

struct Result {
  int code = -1;
  std::string output;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(IONADDR_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ionaddr_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string scenario(const std::string& file) { return (kScenarios / file).string(); }

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("budget on the demo scenario") {
  const auto out = fresh_dir("budget");
  const auto r = run_cli("budget --scenario " + scenario("demo.yaml") + " --out " + out.string());
  REQUIRE(r.code == 0);
  const auto csv = read_file(out / "balanced_curve.csv");
  CHECK(line_count(csv) == 17);
  const auto report = json::parse(read_file(out / "budget.json"));
  CHECK(report["max_channels_at_threshold"] == 14);
  CHECK(report["chain_loss_dB"].get<double>() == doctest::Approx(17.4));
  double prev = 0.0;
  for (const auto& pt : report["balanced_curve"]) {
    CHECK(pt["balanced_power_W"].get<double>() >= prev);  // listed k = 16 down to 1
    prev = pt["balanced_power_W"].get<double>();
  }
  CHECK(report["thermal"]["max_relative_change"].get<double>() == doctest::Approx(0.006).epsilon(1e-9));
}

TEST_CASE("a missing loss field is a config error and writes nothing") {
  const auto dir = fresh_dir("badloss");
  fs::create_directories(dir);
  write_file_atomic(dir / "s.yaml",
                    "name: bad\nsplitter: {source: synthetic_factor5}\nlaser: {input_power_w: 2}\n"
                    "losses:\n  - {name: Waveguide, uncertainty_db: 0.4}\n");
  const auto out = dir / "out";
  const auto r = run_cli("budget --scenario " + (dir / "s.yaml").string() + " --out " + out.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("losses[0].loss_db") != std::string::npos);
  CHECK(r.output.find("line 5") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("crosstalk on the demo scenario") {
  const auto out = fresh_dir("crosstalk");
  const auto r = run_cli("crosstalk --scenario " + scenario("demo.yaml") + " --out " + out.string());
  REQUIRE(r.code == 0);
  const auto report = json::parse(read_file(out / "crosstalk.json"));
  CHECK(report["crosstalk"]["max"].get<double>() < 1e-5);
  const double matched = report["matched"]["crosstalk"]["max"].get<double>();
  CHECK(matched >= 0.5e-4);
  CHECK(matched <= 5e-4);
  CHECK_FALSE(report["lagrange_bare_fiber"]["feasible"].get<bool>());
  CHECK(report["lagrange_expanded"]["feasible"].get<bool>());
  CHECK(line_count(read_file(out / "tolerance_table.csv")) == 21);
  CHECK(read_file(out / "psf.csv").rfind("position_m,intensity\n", 0) == 0);
}

TEST_CASE("tables switch to JSON on request") {
  const auto out = fresh_dir("json");
  const auto r = run_cli("crosstalk --format json --scenario " + scenario("demo.yaml") + " --out " +
                         out.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "psf.json"));
  CHECK(json::parse(read_file(out / "tolerance_table.json")).size() == 20);
  CHECK_FALSE(fs::exists(out / "psf.csv"));
}

TEST_CASE("an infeasible Lagrange budget exits with a domain error") {
  const auto out = fresh_dir("bare");
  const auto r = run_cli("crosstalk --scenario " + scenario("bare_fiber.yaml") + " --out " + out.string());
  CHECK(r.code == 3);
  CHECK(r.output.find("Lagrange") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("path matching within reach needs no splices") {
  const auto out = fresh_dir("pm");
  const auto r = run_cli("pathmatch --scenario " + scenario("demo.yaml") + " --out " + out.string());
  REQUIRE(r.code == 0);
  const auto plan = json::parse(read_file(out / "splice_plan.json"));
  CHECK(plan["entries"].empty());
  CHECK(plan["min_visibility"].get<double>() >= 0.999);
  CHECK(json::parse(read_file(out / "stage_positions.json"))["stages"].size() == 16);
  CHECK(fs::exists(out / "fringes.csv"));
}

TEST_CASE("a channel 5 mm short gets a splice entry") {
  const auto out = fresh_dir("splice");
  const auto r = run_cli("pathmatch --scenario " + scenario("pathmatch_splice.yaml") + " --out " +
                         out.string());
  REQUIRE(r.code == 0);
  const auto plan = json::parse(read_file(out / "splice_plan.json"));
  REQUIRE(plan["entries"].size() == 1);
  CHECK(plan["entries"][0]["channel"] == 3);
  CHECK(plan["entries"][0]["splice_adjustment_m"].get<double>() == doctest::Approx(3e-3));
  const auto stages = json::parse(read_file(out / "stage_positions.json"))["stages"];
  CHECK(stages[2]["out_of_range"].get<bool>());
}

TEST_CASE("an unreachable visibility floor fails cleanly") {
  const auto out = fresh_dir("infeasible");
  const auto r = run_cli("pathmatch --scenario " + scenario("pathmatch_infeasible.yaml") + " --out " +
                         out.string());
  CHECK(r.code == 3);
  CHECK(r.output.find("visibility floor") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("fit-splitter") {
  const auto dir = fresh_dir("fit");
  fs::create_directories(dir);
  std::string uniform = "channel,relative_power\n";
  for (int i = 1; i <= 16; ++i) uniform += std::to_string(i) + ",0.8\n";
  write_file_atomic(dir / "uniform.csv", uniform);
  auto r = run_cli("fit-splitter --measured " + (dir / "uniform.csv").string() + " --out " +
                   (dir / "u").string());
  REQUIRE(r.code == 0);
  const auto tree = json::parse(read_file(dir / "u" / "fitted_tree.json"));
  CHECK(tree["couplers"].size() == 15);
  for (const auto& c : tree["couplers"]) CHECK(c["split_fraction"].get<double>() == 0.5);

  r = run_cli("fit-splitter --measured " + (kScenarios / "data" / "measured_splitter.csv").string() +
              " --out " + (dir / "m").string());
  REQUIRE(r.code == 0);
  const auto fitted = json::parse(read_file(dir / "m" / "fitted_tree.json"));
  CHECK(fitted["round_trip_max_abs_error"].get<double>() < 1e-12);
  CHECK(fitted["leaf_spread"].get<double>() == doctest::Approx(5.0));

  write_file_atomic(dir / "neg.csv", "channel,relative_power\n1,0.5\n2,-0.2\n");
  r = run_cli("fit-splitter --measured " + (dir / "neg.csv").string() + " --out " +
              (dir / "n").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("line 3") != std::string::npos);

  write_file_atomic(dir / "three.csv", "1,1\n2,1\n3,1\n");
  r = run_cli("fit-splitter --measured " + (dir / "three.csv").string() + " --out " +
              (dir / "t").string());
  CHECK(r.code == 2);
}

TEST_CASE("profile analysis of the demo stack") {
  const auto out = fresh_dir("profile");
  const auto r = run_cli("profile-analyze --scenario " + scenario("demo.yaml") + " --out " +
                         out.string());
  REQUIRE(r.code == 0);
  const auto rep = json::parse(read_file(out / "crosstalk_report.json"));
  CHECK(rep["frames"] == 4);
  const double truth = 1e-4 / (1.0 + 1e-4);
  for (const auto& ratio : rep["ratios"]) {
    const double v = ratio["ratio"].get<double>();
    const double u = ratio["uncertainty"].get<double>();
    CHECK(std::abs(v - truth) <= 0.01 * truth + 3.0 * u);
    CHECK_FALSE(ratio["below_noise_floor"].get<bool>());
  }
}

TEST_CASE("all-saturated stack and single-frame input") {
  const auto dir = fresh_dir("sat");
  fs::create_directories(dir);
  std::string frame = "position_m,intensity\n";
  for (int i = 0; i < 50; ++i) frame += ionaddr::formats::format_number(i * 1e-7) + ",4095\n";
  write_file_atomic(dir / "sat.csv", frame);
  write_file_atomic(dir / "sat.json",
                    R"({"frames": [{"file": "sat.csv", "exposure": 1, "saturation_level": 4095}]})");
  auto r = run_cli("profile-analyze --sidecar " + (dir / "sat.json").string() + " --out " +
                   (dir / "o").string());
  CHECK(r.code == 3);
  CHECK(r.output.find("saturated") != std::string::npos);

  // One clean frame; the noise floor comes from the configured dark region.
  std::string single = "position_m,intensity\n";
  for (int i = 0; i < 401; ++i) {
    const double x = -20e-6 + i * 1e-7;
    single += ionaddr::formats::format_number(x) + "," +
              ionaddr::formats::format_number(3000.0 * std::exp(-2 * x * x / 0.81e-12) + 2.0 + (i % 3)) +
              "\n";
  }
  write_file_atomic(dir / "one.csv", single);
  write_file_atomic(dir / "one.json",
                    R"({"frames": [{"file": "one.csv", "exposure": 1, "saturation_level": 4095}],
                        "dark_region": [0, 100]})");
  r = run_cli("profile-analyze --sidecar " + (dir / "one.json").string() + " --out " +
              (dir / "p").string());
  REQUIRE(r.code == 0);
  const auto rep = json::parse(read_file(dir / "p" / "crosstalk_report.json"));
  // Dark samples cycle 2, 3, 4: standard deviation sqrt(2/3).
  CHECK(rep["noise_floor"].get<double>() ==
        doctest::Approx(std::sqrt(2.0 / 3.0) / rep["peak_value"].get<double>()).epsilon(0.02));
}

TEST_CASE("tolerance Monte Carlo needs a seed and honours overrides") {
  const auto dir = fresh_dir("tol");
  fs::create_directories(dir);
  std::string text = read_file(kScenarios / "demo.yaml");
  text.replace(text.find("seed: 20240601\n"), 15, "");
  write_file_atomic(dir / "noseed.yaml", text);
  fs::copy(kScenarios / "data", dir / "data", fs::copy_options::recursive);
  auto r = run_cli("tolerance --scenario " + (dir / "noseed.yaml").string() + " --out " +
                   (dir / "a").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("seed") != std::string::npos);

  r = run_cli("tolerance --seed 5 --scenario " + (dir / "noseed.yaml").string() + " --out " +
              (dir / "b").string());
  REQUIRE(r.code == 0);
  r = run_cli("tolerance --seed 6 --scenario " + (dir / "noseed.yaml").string() + " --out " +
              (dir / "c").string());
  REQUIRE(r.code == 0);
  CHECK(read_file(dir / "b" / "monte_carlo.csv") != read_file(dir / "c" / "monte_carlo.csv"));
  CHECK(read_file(dir / "b" / "tolerance_table.csv") == read_file(dir / "c" / "tolerance_table.csv"));
}

TEST_CASE("usage and I/O errors") {
  CHECK(run_cli("budget --scenario /nonexistent/x.yaml --out /tmp/ionaddr_none").code == 4);
  CHECK(run_cli("budget").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("budget --format xml --scenario " + scenario("demo.yaml")).code == 2);
  CHECK(run_cli("--help").code == 0);
}
