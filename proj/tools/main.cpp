#include <iostream>

#include "mixedwave/cli.hpp"

int main(int argc, char** argv) {
  return mixedwave::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
