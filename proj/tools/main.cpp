#include <iostream>
#include <string>
#include <vector>

#include "clockmag/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clockmag::cli::cli_main(args, std::cout, std::cerr);
}
