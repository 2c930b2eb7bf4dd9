#pragma once

#include <iosfwd>

namespace semsum {

enum ExitCode : int {
  kExitOk = 0,
  kExitDataError = 2,
  kExitProviderError = 3,
  kExitConfigError = 4,
};

/// Entry point of the `semsum` tool. Subcommands: simulate, sweep,
/// gen-corpus, bucket-analysis, serve, snapshot-inspect.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semsum
