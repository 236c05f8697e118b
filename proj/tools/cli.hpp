#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace msplace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitSuiteFailure = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "MSPLACE_OUTPUT_DIR";

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msplace::cli
