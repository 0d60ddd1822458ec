#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aisets::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFalsified = 3;

/// Runs `aisets <subcommand> --config <file> [--seed N] [--out DIR]
/// [--threads N]`. `args` excludes the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aisets::cli
