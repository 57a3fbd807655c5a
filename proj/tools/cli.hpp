#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fall::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // verification failure or runtime error
inline constexpr int kExitUsage = 2;

/// Runs the `fall` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fall::cli
