#include <iostream>

#include "ergkit/cli.hpp"

int main(int argc, char** argv) {
  return ergkit::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
