#include <iostream>

#include "neurocrf_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return neurocrf::cli::run(args, std::cout, std::cerr);
}
