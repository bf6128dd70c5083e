#pragma once

#include <string>
#include <vector>

namespace crossrl::cli {

/// Name of the environment variable that roots relative output paths.
inline constexpr const char* kOutputRootEnv = "CROSSRL_OUTPUT_ROOT";

/// Parses `args` (without the program name) and runs the selected
/// subcommand. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace crossrl::cli
