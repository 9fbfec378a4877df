#include <iostream>
#include <string>
#include <vector>

#include "triagebench/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return triagebench::cli::run(args, std::cout, std::cerr);
}
