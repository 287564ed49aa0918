#pragma once

#include <string>
#include <vector>

namespace diversenet {

// Runs one CLI invocation (argv without the program name). Returns the
// process exit code: 0 success, 2 config/usage error, 3 numerical failure.
// Messages go to stderr; data goes to files only.
int run_cli(const std::vector<std::string>& args);

}  // namespace diversenet
