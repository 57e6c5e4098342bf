#include "gptemper/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gptemper::run_cli(argc, argv, std::cout, std::cerr); }
