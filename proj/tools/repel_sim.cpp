#include <iostream>

#include "repel/cli.hpp"

int main(int argc, char** argv) {
  return repel::cli::main(argc, argv, std::cout, std::cerr);
}
