#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ensemblekit {

// Seed used when neither --seed nor ENSEMBLEKIT_SEED is given.
inline constexpr std::uint64_t kDefaultSeed = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line `args` (without the program name). Normal output
// goes to `out`, diagnostics and usage text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ensemblekit
