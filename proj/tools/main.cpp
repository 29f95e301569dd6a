#include <iostream>

#include "learnrate/cli.hpp"

int main(int argc, char** argv) {
  return learnrate::cli::main_entry(argc, argv, std::cout, std::cerr);
}
