#pragma once

#include <string>
#include <vector>

namespace thermidor {

/// Command-line entry point: run | converge-space | converge-time |
/// mms-check, each taking a config file. Exit codes: 0 success, 2 config
/// error, 3 solver error, 4 accuracy error.
int run_cli(const std::vector<std::string>& args);

}  // namespace thermidor
