#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace veristat {

inline constexpr int kExitEstablished = 0;
inline constexpr int kExitNotEstablished = 1;
inline constexpr int kExitSpecError = 2;
inline constexpr int kExitDataError = 3;

/// Entry point behind the `veristat` executable. `args` excludes the program name.
/// Reports and summaries go to `out`, diagnostics and usage text to `err`; `in` answers
/// plot prompts.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace veristat
