#include <string>
#include <vector>

#include "diversenet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return diversenet::run_cli(args);
}
