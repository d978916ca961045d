#pragma once

// Mode dispatch and report writing for the gfpk command line tool.

#include <string>
#include <vector>

#include <json.hpp>

#include "gfpk/config.hpp"

namespace gfpk {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitParse = 2, kExitSolver = 3 };

struct RunReport {
  int exit_code = kExitOk;
  nlohmann::json report;    // deterministic content, written to report.json
  nlohmann::json timings;   // wall clock, written to timings.json
  std::vector<std::string> artifacts;
};

/// Executes the configured mode and writes every artifact into cfg.output_dir.
RunReport run(const RunConfig& cfg);

/// Derived per-point seed for sweep entry j.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// Command line entry point: gfpk <mode> --config <path> [--out] [--seed] [--threads].
int cli_main(int argc, char** argv);

}  // namespace gfpk
