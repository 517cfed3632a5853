#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace transq::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kComparisonFailure = 1,
    kInvalidModel = 2,
    kMalformedInput = 3,
    kExcessiveTruncation = 4,
    kNonConvergence = 5,
};

/// Runs the command line `args` (args[0] is the program name) and returns
/// the exit code. Results go to `out` unless --out is given; diagnostics go
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace transq::cli
