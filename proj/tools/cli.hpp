#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace loopmass::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,         // usage, parse or I/O error
  kDomain = 2,        // invalid input for the mathematics
  kVerifyFailed = 3,  // a verification check failed
  kNoConvergence = 4,
};

/// Runs one command line (without the program name). JSON and CSV go to
/// `out`, logs and error messages to `err`. The log level comes from the
/// LOOPMASS_LOG environment variable (error, warn, info, debug).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loopmass::cli
