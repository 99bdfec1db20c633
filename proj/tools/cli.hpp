#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pollcast::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

// Runs the command line `args` (without the program name) and returns the
// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pollcast::cli
