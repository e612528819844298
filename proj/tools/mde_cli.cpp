#include <iostream>

#include "mde/cli.hpp"

int main(int argc, char** argv) { return mde::run_cli(argc, argv, std::cout, std::cerr); }
