#include <iostream>

#include "ringeq/cli/app.hpp"

int main(int argc, char** argv) { return ringeq::cli::run(argc, argv, std::cout, std::cerr); }
