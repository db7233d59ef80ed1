#pragma once

#include <string>
#include <vector>

namespace realsim::cli {

/// Runs one command line (without the program name). Returns the process exit
/// code: 0 success, 2 malformed input, 3 validation failure, 4 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace realsim::cli
