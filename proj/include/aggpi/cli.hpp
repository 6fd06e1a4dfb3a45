#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aggpi::cli {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Name of the environment variable that overrides the configured seed
/// (a --seed flag still wins).
inline constexpr const char* kSeedEnv = "AGGPI_SEED";

/// Runs the tool on argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aggpi::cli
