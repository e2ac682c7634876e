#include <iostream>

#include "metacausal/cli.hpp"

int main(int argc, char** argv) {
  return metacausal::cli::run(argc, argv, std::cout, std::cerr);
}
