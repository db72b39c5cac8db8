#include <iostream>
#include <string>
#include <vector>

#include "pdcsample/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pdcsample::run_cli(args, std::cout, std::cerr);
}
