#include <iostream>

#include "levy_ou/cli.hpp"

int main(int argc, char** argv) { return levy_ou::cli::run(argc, argv, std::cout, std::cerr); }
