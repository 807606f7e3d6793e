#ifndef FAIRAUDIT_CLI_HPP
#define FAIRAUDIT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fairaudit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (audit, balance, apply, split, evaluate, compare,
/// synth). `args` excludes the program name. Output files are written
/// directly; diagnostics go to `err`, warnings as `WARN <code> <detail>`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairaudit::cli

#endif  // FAIRAUDIT_CLI_HPP
