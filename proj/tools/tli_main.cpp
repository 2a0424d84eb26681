#include <iostream>
#include <string>
#include <vector>

#include "tli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tli::cli::run(args, std::cout, std::cerr);
}
