#pragma once

#include <iosfwd>

namespace cohesim {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitSolver = 3, kExitIo = 4 };

/// `cohesim run|study|check-law ...`; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cohesim
