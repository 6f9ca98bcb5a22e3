#include <iostream>

#include "avgbound_cli/cli.hpp"

int main(int argc, char** argv) { return avgbound::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
