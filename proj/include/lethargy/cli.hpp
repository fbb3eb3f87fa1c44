#pragma once

#include <ostream>

namespace lethargy {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitUsage = 64;

/// Full command-line front end. Reports go to `out` (or --out), diagnostics
/// and wall time to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lethargy
