#include <iostream>

#include "qrw2d/cli.hpp"

int main(int argc, char** argv) { return qrw2d::cli::run(argc, argv, std::cout, std::cerr); }
