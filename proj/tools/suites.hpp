#pragma once

#include <string>

#include "brz/report.hpp"
#include "config.hpp"

namespace brz::cli {

RunReport run_hankel(const RunConfig& config);
RunReport run_semigroup(const RunConfig& config);
RunReport run_riesz(const RunConfig& config);
RunReport run_bellman(const RunConfig& config);
RunReport run_embed(const RunConfig& config);

/// Dispatch by subcommand name; throws std::invalid_argument for unknown names.
RunReport run_suite(const std::string& command, const RunConfig& config);

/// report.json, report.csv and one CSV per table under `dir` (created if missing).
void write_outputs(const RunReport& report, const std::string& dir);

}  // namespace brz::cli
