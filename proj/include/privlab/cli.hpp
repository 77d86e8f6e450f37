#pragma once

#include <string>
#include <vector>

namespace privlab::cli {

// Exit-code contract: 0 success, 1 input/validation error, 2 runtime/I-O
// error. `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace privlab::cli
