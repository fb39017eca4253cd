#pragma once

#include <string>
#include <vector>

#include "blowup/fixtures.hpp"
#include "blowup/io.hpp"

namespace blowup {

enum ExitStatus : int { kExitOk = 0, kExitCheckFailed = 1, kExitSolverFailed = 2, kExitConfigError = 3 };

// Maps a library error to the exit status of the runner.
ExitStatus exit_status_for(const Error& error);

struct ScenarioOutcome {
  std::vector<ReportRow> rows;
  std::vector<std::string> files;  // written outputs
  bool passed() const;
};

// Output directory of a scenario; BLOWUP_OUTPUT_DIR, when set, replaces the configured parent.
std::string scenario_output_dir(const ScenarioConfig& config);

// Runs the solves and checks of a scenario and writes its report and exports.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

// Scenario by catalog name or by path, mapped to an exit status; diagnostics go to stderr.
int run_verify(const std::string& name_or_path);

int run_cli(int argc, char** argv);

}  // namespace blowup
