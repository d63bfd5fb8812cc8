#include <iostream>

#include "rgg/cli.hpp"

int main(int argc, char** argv) {
    return rgg::cli::run(argc, argv, std::cout, std::cerr);
}
