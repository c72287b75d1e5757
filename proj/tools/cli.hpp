// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace evoboss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Entry point of the `evoboss` tool; returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evoboss::cli
