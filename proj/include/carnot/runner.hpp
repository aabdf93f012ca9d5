#pragma once

#include <string>

#include "carnot/config.hpp"
#include "carnot/group_law.hpp"

namespace carnot {

/// Outcome of one subcommand: the text product (CSV or report) and a process
/// code, 0 for success and 4 when an experiment ran but its verdict failed.
/// Configuration, format, domain and refusal problems are thrown instead.
struct RunResult {
  int code = 0;
  std::string out;
};

/// Builds the group named by spec: a builtin id, or a path to a bracket
/// table file when spec contains a path separator or ends in ".group".
Group open_group(const std::string& spec);

/// Subcommands: group-info, law, pansu-check, pansu-probe, quantize,
/// invariance. Unknown names throw ConfigError.
RunResult run_subcommand(const std::string& cmd, const ExperimentConfig& cfg);

} // namespace carnot
