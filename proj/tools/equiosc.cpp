#include <iostream>

#include "equiosc/cli.hpp"

int main(int argc, char** argv) { return equiosc::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
