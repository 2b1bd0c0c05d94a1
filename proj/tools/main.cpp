#include "cevsv/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cevsv::cli::run(argc, argv, std::cout, std::cerr); }
