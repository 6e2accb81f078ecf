#pragma once

namespace wo {

// Parses argv and runs one subcommand (train | shuffle | decode | tune |
// eval | bench). Returns the process exit code: 0 success, 1 usage error,
// 2 data error, 3 violated internal invariant.
int run_cli(int argc, const char* const* argv);

}  // namespace wo
