#include <iostream>

#include "polymer_lab/cli.hpp"

int main(int argc, char** argv) {
    return polymer_lab::cli::run(argc, argv, std::cout, std::cerr);
}
