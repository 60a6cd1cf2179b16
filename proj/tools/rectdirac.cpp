#include <iostream>

#include "rectdirac/cli.hpp"

int main(int argc, char** argv) { return rectdirac::cli::run(argc, argv, std::cout, std::cerr); }
