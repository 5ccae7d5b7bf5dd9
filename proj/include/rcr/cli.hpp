#pragma once

#include <iosfwd>

namespace rcr {

// Entry point behind the rcr binary; split out so tests can drive it.
// Returns 0 on success, 2 on configuration errors, 1 on runtime errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rcr
