#include <string>
#include <vector>

#include "privlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return privlab::cli::run(args);
}
