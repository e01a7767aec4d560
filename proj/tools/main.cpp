#include <iostream>
#include <vector>

#include "xfer/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return xfer::run_cli(args, std::cout, std::cerr);
}
