#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nch::cli {

enum ExitCode : int { kOk = 0, kInadmissible = 1, kConfigError = 2, kSolverError = 3 };

/// Entry point behind the `nch` executable. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nch::cli
