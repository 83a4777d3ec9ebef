#pragma once

#include <string>
#include <vector>

namespace monster::cli {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3, kPartialFailure = 4 };

/// Parses arguments (without the program name) and runs the selected command.
int run_cli(const std::vector<std::string>& args);

}  // namespace monster::cli
