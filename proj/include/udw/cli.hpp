#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace udw {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

/// Entry point of udw_sim. `args` excludes the program name. Data goes to the
/// output path (or `out` when none is given); progress and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace udw
