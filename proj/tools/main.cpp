#include "tolpred/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tolpred::cli::run(argc, argv, std::cout, std::cerr); }
