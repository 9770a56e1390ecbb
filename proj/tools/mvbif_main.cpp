#include <iostream>

#include "mvbif/cli.hpp"

int main(int argc, char** argv) { return mvbif::run(argc, argv, std::cout, std::cerr); }
