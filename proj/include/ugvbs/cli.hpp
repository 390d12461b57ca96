#ifndef UGVBS_CLI_HPP
#define UGVBS_CLI_HPP

#include <iosfwd>

namespace ugvbs {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInfeasible = 2 };

/// Entry point of the `ugvbs` tool. Subcommands: solve, sweep, trace,
/// path-dump, gen-scenario, fit-beta.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace ugvbs

#endif // UGVBS_CLI_HPP
