#pragma once

#include <ostream>

/// The polymer-lab command line: one subcommand per computation or
/// verification suite, CSV/JSON artifacts plus a manifest in --out.
namespace polymer_lab::cli {

enum ExitCode : int {
    success = 0,
    usage_error = 1,
    property_failure = 2,
    inconclusive = 3,
};

/// Parses argv, runs the subcommand and returns the exit code. Diagnostics go
/// to `err` as a single line; computed values are echoed to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polymer_lab::cli
