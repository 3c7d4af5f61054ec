#include <iostream>

#include "nlinv/cli.hpp"

int main(int argc, char** argv) { return nlinv::cli::run(argc, argv, std::cout, std::cerr); }
