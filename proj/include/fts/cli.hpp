#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fts::cli {

/// Exit statuses of `run`.
inline constexpr int kSuccess = 0;
inline constexpr int kInputError = 1;
inline constexpr int kInternalError = 2;

/// Runs one subcommand (scan, simulate, calibrate, critical-values,
/// exit-times, report). `args` excludes the program name. Results go to files
/// named by `--out` or to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fts::cli
