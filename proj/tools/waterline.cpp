#include <iostream>

#include "waterline/cli.hpp"

int main(int argc, char** argv) { return waterline::run_cli(argc, argv, std::cout, std::cerr); }
