#pragma once

#include <string>
#include <vector>

namespace knet::cli {

/// Runs one subcommand; `args` excludes the program name. Exit codes: 0 success, 1 data or schema error,
/// 2 usage error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace knet::cli
