#include "hsic/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return hsic::cli::run(argc, argv, std::cout, std::cerr);
}
