#include <iostream>
#include <string>
#include <vector>

#include "rcbf_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return rcbf::cli::run(args, std::cout, std::cerr);
}
