#pragma once

#include <string>
#include <vector>

namespace spectrum::cli {

/// Exit codes: 0 success, 1 validation or input errors (one JSON line on
/// stderr), 2 usage errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command-line tool. `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace spectrum::cli
