#include <iostream>

#include "ugvbs/cli.hpp"

int main(int argc, char **argv) { return ugvbs::run_cli(argc, argv, std::cout, std::cerr); }
