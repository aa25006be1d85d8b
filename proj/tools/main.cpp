#include <iostream>

#include "nof1/cli.hpp"

int main(int argc, char** argv) {
  return nof1::run_cli(argc, argv, std::cout, std::cerr);
}
