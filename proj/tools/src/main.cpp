#include <iostream>

#include "kcover_cli/cli.hpp"

int main(int argc, char** argv) {
  return kcover::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
