#pragma once

#include <iosfwd>

namespace bass::cli {

// Exit codes: 0 success, 1 usage or validation error, 2 I/O or backend error.
int run(int argc, char** argv);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace bass::cli
