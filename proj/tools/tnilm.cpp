#include <iostream>

#include "tnilm/cli.hpp"

int main(int argc, char** argv) { return tnilm::cli::run(argc, argv, std::cout, std::cerr); }
