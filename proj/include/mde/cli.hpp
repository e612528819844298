#pragma once

#include <iosfwd>

namespace mde {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kInputError = 2, kNumericalError = 3 };

/// Entry point of the `mde` tool (subcommands simulate, verify, converge,
/// distance). Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mde
