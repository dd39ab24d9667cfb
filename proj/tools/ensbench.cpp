#include <iostream>

#include "ensbench/cli.hpp"

int main(int argc, char** argv) { return ensbench::run_cli(argc, argv, std::cout, std::cerr); }
