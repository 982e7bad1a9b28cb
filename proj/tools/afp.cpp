#include <string>
#include <vector>

#include "afp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return afp::run_cli(args);
}
