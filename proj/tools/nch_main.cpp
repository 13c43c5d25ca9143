#include <iostream>

#include "nch/cli.hpp"

int main(int argc, char** argv) {
  return nch::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
