#include <iostream>
#include <string>
#include <vector>

#include "contact_decay/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return contact_decay::cli::run(args, std::cout, std::cerr);
}
