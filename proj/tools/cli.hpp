#pragma once

#include <ostream>

namespace sddetem {

// Full command-line front end, callable in-process (tests drive it directly; main() is
// a thin wrapper). Returns the process exit code: 0 success, 1 configuration error,
// 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sddetem
