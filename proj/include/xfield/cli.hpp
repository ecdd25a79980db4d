#pragma once

#include <string>
#include <vector>

namespace xfield {

// Entry point of the `xfield` command-line tool. Returns the process exit
// code: 0 success, 1 usage or configuration, 2 data or format, 3 numeric.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace xfield
