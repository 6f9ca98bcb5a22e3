#pragma once

#include <iosfwd>

namespace avgbound::cli {

enum ExitStatus : int { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

/// Runs one command line. Human-readable output goes to `out`, diagnostics
/// and usage text to `err`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace avgbound::cli
