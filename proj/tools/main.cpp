#include <iostream>

#include "mdn/cli.hpp"

int main(int argc, char** argv) { return mdn::cli_main(argc, argv, std::cout, std::cerr); }
