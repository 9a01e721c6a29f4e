#include <iostream>

#include "semvox/cli.hpp"

int main(int argc, char** argv) { return semvox::cli::run(argc, argv, std::cout, std::cerr); }
