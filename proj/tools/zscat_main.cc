#include <iostream>
#include <string>
#include <vector>

#include "zscat/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return zscat::cli::run(args, std::cout, std::cerr);
}
