#include "sfzsl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sfzsl::run_cli(argc, argv, std::cout, std::cerr); }
