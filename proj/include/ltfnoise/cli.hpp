#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltfnoise {

inline constexpr const char* kVersion = "ltfnoise 0.1.0";

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitCap = 2,
  kExitVerification = 3,
};

// Runs the tool with argv-style arguments (args[0] is the program name).
// Results go to `out` unless --output names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltfnoise
