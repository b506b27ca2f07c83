#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace l2t {

enum ExitCode : int { kExitOk = 0, kExitVerdict = 1, kExitInput = 2, kExitBudget = 3 };

/// Parses arguments (without the program name), dispatches the subcommand and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace l2t
