#include <iostream>

#include "tpg/cli.hpp"

int main(int argc, char** argv) {
    return tpg::run_cli(argc, argv, std::cout, std::cerr);
}
