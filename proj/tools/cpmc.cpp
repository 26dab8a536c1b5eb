#include <iostream>
#include <string>
#include <vector>

#include "cpm/cli.hpp"

int main(int argc, char** argv) {
  return cpm::cli::cpmc_main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
