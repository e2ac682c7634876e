#pragma once
// Command-line front end. Subcommands: gen, discover, bounds, reproduce,
// simulate. Exit codes: 0 ok, 2 usage, 3 I/O, 4 internal.

#include <iosfwd>

namespace metacausal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInternal = 4;

// Default master seed: METACAUSAL_SEED when set and numeric, else 0.
unsigned long long default_seed();

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace metacausal::cli
