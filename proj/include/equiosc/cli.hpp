#pragma once

#include <iosfwd>

namespace equiosc::cli {

/// Exit codes: 0 ok, 2 a solve did not converge or a checked property failed, 1 error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

/// Entry point of the equiosc command. Reads a JSON config from --config (or
/// `in` when the path is "-" or omitted) and writes one JSON document to `out`.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace equiosc::cli
