#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rumnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one subcommand. `args` excludes the program name. Results go to
// `out` (and to files named by --out flags); diagnostics and usage to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rumnet::cli
