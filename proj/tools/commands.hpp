#pragma once

#include <iosfwd>

namespace linggen::cli {

// Parses argv and runs one subcommand. Returns the process exit code:
// 0 on success, 2 for usage and configuration errors, 1 otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linggen::cli
