#include "illusion_forge/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return illusion_forge::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
