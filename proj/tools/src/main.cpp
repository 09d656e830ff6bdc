#include <iostream>

#include "hesspec/cli/app.hpp"

int main(int argc, char** argv) { return hesspec::cli::run(argc, argv, std::cout, std::cerr); }
