#pragma once

#include <ostream>

namespace rmfg {

// exit codes: 0 success, 1 solver error, 2 usage or configuration error
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmfg
