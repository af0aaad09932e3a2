#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace singpot::cli {

enum ExitCode { Ok = 0, Failure = 1, ConfigFailure = 2, SolverFailure = 3 };

/// Runs one command line (without the program name). Results go to `out`
/// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace singpot::cli
