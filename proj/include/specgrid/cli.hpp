#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace specgrid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Entry point of the `specgrid` tool. args excludes the program name.
/// Data goes to files (or `out` for inspect without --out); diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specgrid
