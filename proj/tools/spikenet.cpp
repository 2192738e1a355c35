#include <string>
#include <vector>

#include "spikenet/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spikenet::run_cli(args);
}
