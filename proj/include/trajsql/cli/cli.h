// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

namespace trajsql {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnsupported = 2;

/// `trajsql <version> (actions <catalog hash>)`.
std::string version_string();

/// Parses argv and runs one verb. Never throws.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace trajsql
