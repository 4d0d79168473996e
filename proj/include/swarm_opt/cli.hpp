#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarm_opt/outputs.hpp"
#include "swarm_opt/scenario_io.hpp"

namespace swarm {

struct RunOptions {
  std::optional<long> horizon;
  std::filesystem::path out_dir;
  bool plots = true;
};

/// Runs a validated scenario file and writes its outputs. Relative output
/// paths resolve against opts.out_dir.
RunSummary execute_run(const ScenarioFile& file, const RunOptions& opts);

/// $SWARM_OPT_OUT when set, otherwise "swarm_out".
std::filesystem::path default_out_dir();

/// Entry point of the swarm-opt tool. Exit codes: 0 success, 1 validation
/// failure (bad input, failed verification), 2 assumption violated at run time.
int cli_main(const std::vector<std::string>& args);

}  // namespace swarm
