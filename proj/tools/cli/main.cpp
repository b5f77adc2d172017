#include <iostream>

#include "vihsd/cli.hpp"

int main(int argc, char** argv) { return vihsd::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
