#pragma once

#include <ostream>

namespace smoke {

/// Entry point of the smokectl command line. Errors go to `err` as one
/// JSON object per line; the return value is the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smoke
