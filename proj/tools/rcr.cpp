#include <iostream>

#include "rcr/cli.hpp"

int main(int argc, char** argv) {
    return rcr::cli_main(argc, argv, std::cout, std::cerr);
}
