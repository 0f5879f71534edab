#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dcsit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Output files named by --output are written
// directly; everything else goes to `out` / `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dcsit
