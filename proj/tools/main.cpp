#include <iostream>

#include "semsum/cli.hpp"

int main(int argc, char** argv) { return semsum::run_cli(argc, argv, std::cout, std::cerr); }
