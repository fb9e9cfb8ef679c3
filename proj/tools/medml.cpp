#include "medml/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return medml::cli::run(argc, argv, std::cout, std::cerr); }
