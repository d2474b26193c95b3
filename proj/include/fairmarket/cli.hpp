#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain verdict (unfair
// market, infeasible request), 2 usage, parse or model error, 3 internal
// error (including --verify disagreements).

#include <iosfwd>
#include <string>
#include <vector>

namespace fm {

enum ExitCode : int { kExitOk = 0, kExitVerdict = 1, kExitUsage = 2, kExitInternal = 3 };

/// `args` excludes the program name. Reports go to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fm
