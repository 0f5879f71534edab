#include <iostream>
#include <string>
#include <vector>

#include "dcsit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dcsit::run_cli(args, std::cout, std::cerr);
}
