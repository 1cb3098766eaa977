#pragma once

#include <iosfwd>

namespace simhaystack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `simhaystack` tool with injectable streams. Results go
/// to `out`, progress and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simhaystack::cli
