#include <iostream>

#include "mmcf/cli.hpp"

int main(int argc, char** argv) { return mmcf::run_cli(argc, argv, std::cout, std::cerr); }
