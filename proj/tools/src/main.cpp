#include <iostream>

#include "tracefail/commands.hpp"

int main(int argc, char** argv) { return tracefail::cli::run(argc, argv, std::cout, std::cerr); }
