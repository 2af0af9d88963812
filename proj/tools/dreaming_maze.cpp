#include <iostream>

#include "dmaze/harness.hpp"

int main(int argc, char** argv) {
  return dmaze::cli_dispatch(argc, argv, std::cout, std::cerr);
}
