#pragma once

#include <iosfwd>

namespace amgcn::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kInvalidConfig = 3,
  kMissingFile = 4,
  kBadData = 5,
  kGradCheckFailed = 6,
  kNumericalFailure = 7,
};

// Runs one command. Normal output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amgcn::cli
