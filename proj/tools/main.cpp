#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return spacee::cli::run(argc, argv, std::cout, std::cerr); }
