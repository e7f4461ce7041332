#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swcnn::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

// Runs one subcommand. `args` excludes the program name, e.g.
// {"synth", "--clean", "a.png", ...}. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swcnn::cli
