#pragma once

#include "minstab/config.hpp"
#include "minstab/report.hpp"

#include <iosfwd>

namespace minstab {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitStable = 0,
  kExitError = 1,
  kExitUnstable = 2,
  kExitInconclusive = 3,
};

struct CommandResult {
  int exit_code = kExitError;
  Json report;
};

/// Runs config.subcommand, writes report.json and the CSV artifacts into
/// config.output.dir and prints a short summary to `log`.
///   criterion       0 if the criterion holds in the chosen mode, 2 otherwise
///   analyze         check_graph + min_rayleigh; exit from the stability verdict
///   flow            0 when the residual target is reached, 3 otherwise
///   verify-algebra  0 when the inequality suite finds no violation, 2 otherwise
///   pipeline        scale, flow, check, min_rayleigh; exit from the verdict
CommandResult run_command(const RunConfig& config, std::ostream& log);

}  // namespace minstab
