#include <iostream>

#include "mlrisk/cli.hpp"

int main(int argc, char** argv) { return mlrisk::run_cli(argc, argv, std::cout, std::cerr); }
