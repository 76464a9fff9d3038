#pragma once
#include <iosfwd>

namespace stpca::cli {

// Exit codes: 0 ok, 1 data error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stpca::cli
