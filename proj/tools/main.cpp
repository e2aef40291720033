#include "lmix/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return lmix::cli::run_cli(argc, argv, std::cout, std::cerr); }
