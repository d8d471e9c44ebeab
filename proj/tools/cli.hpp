#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conflap::cli {

/// Exit codes: 0 success, 1 invalid input or parameters, 2 numerical failure.
enum ExitCode : int { ok = 0, validation_failure = 1, numerical_failure = 2 };

/// Runs one command. `args` excludes the program name. Results go to `out` unless
/// --output names a file; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace conflap::cli
