#include <iostream>

#include "hyperforge/cli.hpp"

int main(int argc, char** argv) {
    return hf::cli::run(argc, argv, std::cout, std::cerr);
}
