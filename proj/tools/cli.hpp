#pragma once

#include <iosfwd>

namespace phmbd::cli {

// Exit codes: 0 success, 1 usage or configuration error, 2 Newton failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNewton = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phmbd::cli
