#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return stepfit::cli::main_entry(argc, argv, std::cerr); }
