#pragma once

#include <iosfwd>

namespace dynn::cli {

// Exit codes: 0 ok, 1 I/O or parse, 2 math precondition, 3 integration failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dynn::cli
