#include <iostream>
#include <string>
#include <vector>

#include "volregime_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return volregime::cli::dispatch(args, std::cout, std::cerr);
}
