#include <iostream>

#include "igac/cli.hpp"

int main(int argc, char** argv) { return igac::cli::main(argc, argv, std::cout, std::cerr); }
