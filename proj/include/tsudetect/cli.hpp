#pragma once

#include <string>
#include <vector>

namespace tsudetect::cli {

// Exit codes: 0 success, 1 runtime or IO failure, 2 usage error.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);  // args excludes the program name

}  // namespace tsudetect::cli
