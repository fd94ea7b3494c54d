#include <iostream>

#include "kshear/cli.hpp"

int main(int argc, char** argv) { return kshear::cli::dispatch(argc, argv, std::cout, std::cerr); }
