#include <iostream>
#include <string>
#include <vector>

#include "ltfnoise/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ltfnoise::run_cli(args, std::cout, std::cerr);
}
