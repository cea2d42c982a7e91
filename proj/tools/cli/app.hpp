#pragma once

namespace opdrift::cli {

// Parses argv, dispatches a subcommand and maps errors onto exit codes.
int run_cli(int argc, char** argv);

}  // namespace opdrift::cli
