#include <iostream>

#include "odc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return odc::run_cli(args, std::cout, std::cerr);
}
