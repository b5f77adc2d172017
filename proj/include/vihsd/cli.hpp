#pragma once

#include <iosfwd>

namespace vihsd {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // verification failure or internal error
  kExitConfig = 2,   // invalid config, flags or incompatible checkpoint
  kExitData = 3,     // unreadable or malformed input data
  kExitNumeric = 4,  // training diverged
};

/// Entry point behind the `vihsd` binary: subcommands train, eval, predict,
/// verify. Errors print one line `vihsd: error[<kind>]: <message>` to `err`.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace vihsd
