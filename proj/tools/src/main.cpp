#include <iostream>

#include "multifid_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return multifid::cli::run(args, std::cout, std::cerr);
}
