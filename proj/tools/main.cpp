#include <iostream>
#include <string>
#include <vector>

#include "fts/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return fts::cli::run(args, std::cout, std::cerr);
}
