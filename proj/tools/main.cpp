#include <string>
#include <vector>

#include "thermidor/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return thermidor::run_cli(args);
}
