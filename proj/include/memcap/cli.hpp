#pragma once

#include <iosfwd>

namespace memcap {

/// Exit codes: 0 success, 1 simulation or acceptance failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

} // namespace memcap
