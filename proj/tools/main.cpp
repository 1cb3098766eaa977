#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return simhaystack::cli::run(argc, argv, std::cout, std::cerr); }
