#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace povdec {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitConfigError = 2,
  kExitDataError = 3,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace povdec
