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

#ifndef IONADDR_COMMANDS_HPP
#define IONADDR_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ionaddr/scenario.hpp"

namespace ionaddr::cli {

enum class TableFormat { Csv, Json };

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitDomain = 3,
  kExitIo = 4,
};

struct Options {
  std::optional<std::filesystem::path> scenario;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  TableFormat format = TableFormat::Csv;
  std::optional<std::filesystem::path> measured;  // fit-splitter
  std::optional<std::filesystem::path> sidecar;   // profile-analyze
};

// Named file contents produced by one command; nothing touches disk until
// the whole set has been computed.
struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;  // one-paragraph stdout report
};

OutputSet cmd_budget(const Scenario& sc, const Options& opt);
OutputSet cmd_crosstalk(const Scenario& sc, const Options& opt);
OutputSet cmd_tolerance(const Scenario& sc, const Options& opt);
OutputSet cmd_pathmatch(const Scenario& sc, const Options& opt);
OutputSet cmd_fit_splitter(const std::filesystem::path& measured, const Options& opt);
OutputSet cmd_profile_analyze(const std::filesystem::path& sidecar, const Options& opt);

// Validates, computes, writes. Maps errors to exit codes and prints messages
// to err.
int run(const std::string& verb, const Options& opt, std::ostream& out, std::ostream& err);

}  // namespace ionaddr::cli

#endif  // IONADDR_COMMANDS_HPP
