#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace i2lt::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Runs one `i2lt` subcommand. `args[0]` is the program name. Reports go to
/// `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace i2lt::cli
