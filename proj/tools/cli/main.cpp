#include <iostream>

#include "mdest_cli/commands.hpp"

int main(int argc, char** argv) { return mdest::cli::run_cli(argc, argv, std::cout, std::cerr); }
