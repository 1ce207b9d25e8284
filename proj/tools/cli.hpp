#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace echotensor::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Runs one command line (args[0] is the program name). Human-readable
/// progress goes to `out`, diagnostics to `err`; artifacts are written
/// under --out-dir.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace echotensor::cli
