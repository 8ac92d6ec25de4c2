#include <iostream>

#include "rmfg/cli.hpp"

int main(int argc, char** argv) { return rmfg::run_cli(argc, argv, std::cout, std::cerr); }
