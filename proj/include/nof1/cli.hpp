#pragma once

// Command-line front end: simulate | mc | diagnose.
//
// Exit codes: 0 success, 1 estimation failure, 2 invalid config or input,
// 3 file-system error.

#include <iosfwd>

namespace nof1 {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitIo = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* version_string();

}  // namespace nof1
