#include <vector>

#include "emovox/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return emovox::cli::run(args);
}
