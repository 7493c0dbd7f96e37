#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kprobe {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitNumerical = 1,   ///< numerical or domain error
    kExitNegative = 2,    ///< hypotheses fail or the verdict is not kolmogorov-holds
    kExitConfig = 3,      ///< malformed config or command line
};

/// Runs the tool in-process; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kprobe
