#include <iostream>
#include <string>
#include <vector>

#include "msmux/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return msmux::cli::run(args, std::cout, std::cerr);
}
