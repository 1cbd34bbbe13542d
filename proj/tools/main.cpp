#include <iostream>
#include <string>
#include <vector>

#include "trisq/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return trisq::run_command(args, std::cout, std::cerr);
}
