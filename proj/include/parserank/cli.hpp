#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parserank::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

// Entry point behind the `parserank` executable. `args` excludes the
// program name. Subcommands: stats, diagnose, train, evaluate, crossval,
// synth.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace parserank::cli
