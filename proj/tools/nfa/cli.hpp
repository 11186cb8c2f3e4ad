#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nfa::app {

/// Exit codes: 0 success, 1 usage or I/O, 2 validation, 3 numeric failure.
enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kNumeric = 3 };

/// Runs `nfa <subcommand> ...`. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nfa::app
