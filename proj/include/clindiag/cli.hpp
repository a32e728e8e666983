#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clindiag {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNonConvergence = 3,
};

/// Runs one command line (without the program name). Regular output goes to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clindiag
