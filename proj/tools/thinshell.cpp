#include <iostream>

#include "thinshell/cli.hpp"

int main(int argc, char** argv) {
  return thinshell::run_cli(argc, argv, std::cout, std::cerr);
}
