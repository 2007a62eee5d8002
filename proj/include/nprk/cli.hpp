#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nprk::cli {

enum ExitCode : int { Success = 0, Invalid = 1, SolverFailure = 2, OverBudget = 3 };

/// Runs the command line `args` (without the program name), writing data to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace nprk::cli
