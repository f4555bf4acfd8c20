#pragma once

#include <iosfwd>

namespace sfzsl {

/// Exit codes: 0 success, 1 internal error, 2 usage or validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfzsl
