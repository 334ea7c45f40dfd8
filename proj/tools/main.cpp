#include <iostream>
#include <string>
#include <vector>

#include "nkspec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return nkspec::cli::run(args, std::cout, std::cerr);
}
