#pragma once

namespace fingergan::cli {

/// Exit status of run().
enum ExitCode : int { kSuccess = 0, kValidationError = 1, kRuntimeFailure = 2 };

/// Parses the command line, layers the configuration (defaults, --config
/// file, FGAN_* environment variables, flags) and dispatches to one of
/// synth-data, train, enhance, eval, plot, selfcheck.
int run(int argc, char** argv);

}  // namespace fingergan::cli
