#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace solaudit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitGate = 2;

// Entry point of the `solaudit` tool. `args[0]` is the program name.
// Returns 0 on success or an audit below the gate, 1 on usage or environment
// errors, 2 when an audit reaches the gate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace solaudit
