#include <iostream>

#include "sqg/cli/cli.hpp"

int main(int argc, char** argv) { return sqg::cli::dispatch(argc, argv, std::cout, std::cerr); }
