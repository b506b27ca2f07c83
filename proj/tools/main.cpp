#include <iostream>

#include "l2tower/cli.hpp"

int main(int argc, char** argv) {
  return l2t::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
