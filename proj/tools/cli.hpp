#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace isobn::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kValidationError = 2,
    kFeasibilityError = 3,
    kInternalError = 4,
};

/// Runs one command line (args[0] is the program name). Data goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isobn::cli
