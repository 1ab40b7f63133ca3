#include <iostream>

#include "vswno/cli.hpp"

int main(int argc, char** argv) { return vswno::cli::run(argc, argv, std::cout, std::cerr); }
