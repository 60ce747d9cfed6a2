#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mazt/config.hpp"

namespace mazt {

/// Exit-code contract of the command-line front end.
enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 2,
  kExitSolverFailure = 3,
  kExitConfigError = 4,
};

struct ScenarioOutcome {
  int exit_code;
  std::string summary_json;            // empty for config errors
  std::filesystem::path summary_path;  // empty for config errors
  std::string message;                 // error text, if any
};

/// Runs a validated scenario and writes every artifact under s.out_dir.
/// Module errors are reported in the summary with exit code 3.
ScenarioOutcome run_scenario(const Scenario& s, int threads);

/// Parses the config for `kind` and runs it; config problems give exit 4.
ScenarioOutcome run_scenario_file(
    const std::string& kind, const std::filesystem::path& config, int threads,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace mazt
