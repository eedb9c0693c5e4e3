#pragma once

namespace phaseglm {

// Full command-line front end (subcommands sweep, hmle, separate, check,
// moments). Returns the process exit code: 0 success, 2 usage/config error,
// 3 runtime failure. Never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace phaseglm
