#include <iostream>

#include "lethargy/cli.hpp"

int main(int argc, char** argv) { return lethargy::run_cli(argc, argv, std::cout, std::cerr); }
