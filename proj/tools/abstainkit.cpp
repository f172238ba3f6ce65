#include <iostream>
#include <string>
#include <vector>

#include "abstain/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return abstain::cli::run_command(args, std::cout);
}
