#include <iostream>
#include <string>
#include <vector>

#include "specgrid/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return specgrid::run_cli(args, std::cout, std::cerr);
}
