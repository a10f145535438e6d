#pragma once

#include <iosfwd>

namespace normforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (sample, weights, sparsify, lewis, verify, bench).
/// Returns 0 on success, 1 when a verification or certificate fails and 2 on
/// usage or input errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace normforge::cli
