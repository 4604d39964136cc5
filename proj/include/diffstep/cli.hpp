#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace diffstep::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 1,
  kNonConvergence = 2,
  kInternalError = 3,
};

struct CliInvocation {
  std::string subcommand;  // solve | sweep | compare-oracle | baseline | print-default-config
  std::string config_path;
  std::string out_path;
  std::string allocation_path;  // solve only, optional JSON dump of the allocations
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  double grid_step = 1.0;
  int verbosity = 0;
  bool record_timing = false;
};

/// Executes one invocation. Progress goes to `log`, machine-readable output
/// to `out_path` (stdout for print-default-config).
int run(const CliInvocation& invocation, std::ostream& stdout_stream, std::ostream& log,
        std::ostream& err);

/// Parses argv and dispatches to run().
int main_entry(int argc, char** argv);

}  // namespace diffstep::cli
