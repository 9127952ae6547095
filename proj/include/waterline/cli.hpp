#pragma once

#include <iosfwd>

namespace waterline {

/// Entry point for the `waterline` executable. Returns 0 on success, 1 for
/// bad input (flags, files, formats) and 2 for internal failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace waterline
