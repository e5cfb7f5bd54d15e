#pragma once

namespace msic::cli {

/// Full command-line entry point: parses argv, dispatches the
/// subcommand, maps exceptions to exit codes (0 success, 1 usage/
/// validation problems, 2 runtime failures).
int run_cli(int argc, const char* const* argv);

}  // namespace msic::cli
