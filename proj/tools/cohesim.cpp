#include "cohesim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cohesim::cli_main(argc, argv, std::cout, std::cerr); }
