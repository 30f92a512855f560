#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace newsclust::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (without the program name). The JSON summary goes to
// out, diagnostics and usage text to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace newsclust::cli
