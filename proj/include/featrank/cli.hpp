#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace featrank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Runs one invocation. `args` includes the program name. Never exits the
/// process; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace featrank::cli
