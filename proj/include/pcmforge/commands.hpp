//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_COMMANDS_HPP_
#define PCMFORGE_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcmforge/objective.hpp"

namespace pcmforge::cli {

inline constexpr const char *kToolName = "pcm-forge";
inline constexpr const char *kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitMissingInput = 2,
  kExitValidation = 3,
  kExitSolverFailure = 4,
};

struct RunOptions {
  std::optional<std::filesystem::path> config; ///< default case study if unset
  std::filesystem::path out_dir = "pcm-forge-out";
  std::optional<std::filesystem::path> profile; ///< overrides the config's
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
  /// Worker threads for the multi-start (0: hardware concurrency).
  int threads = 0;
  std::vector<std::string> argv; ///< recorded in the manifest
};

/// Rolls out the fixed policy and writes trajectory.csv, objectives.json,
/// scenario.cfg, profile.csv and manifest.json.
int cmd_simulate(const RunOptions &options, std::ostream &out,
                 std::ostream &err);

/// Solves the design (and control) problem and writes summary.json,
/// trajectory.csv, objectives.json, solve.log, scenario.cfg, profile.csv and
/// manifest.json.
int cmd_optimize(const RunOptions &options, std::ostream &out,
                 std::ostream &err);

/// Prints every run's objectives and one ratio row (first / run) per run.
int cmd_compare(const std::vector<std::filesystem::path> &runs,
                std::ostream &out, std::ostream &err);

struct NamedBreakdown {
  std::string name;
  objective::ObjectiveBreakdown b;
};
std::string format_compare_table(const std::vector<NamedBreakdown> &runs);

/// Parses argv and dispatches. Usage errors exit with kExitMissingInput.
int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err);

} // namespace pcmforge::cli

#endif // PCMFORGE_COMMANDS_HPP_
