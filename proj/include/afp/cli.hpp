#pragma once
// Command-line front end: design / evaluate / sweep / simulate / reproduce.

#include <string>
#include <vector>

namespace afp {

/// Runs the tool with the given arguments (program name excluded).
/// Returns the process exit code: 0 on success, 2 when a design search
/// finishes infeasible (the solution is still written) or a simulation
/// exceeds its tolerance, 1 on errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace afp
