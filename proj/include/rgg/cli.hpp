#pragma once

#include <iosfwd>

namespace rgg::cli {

/// Entry point of the `rgg` tool. Returns 0 on success, 1 on a usage error
/// and 2 on a numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rgg::cli
