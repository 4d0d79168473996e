#include <string>
#include <vector>

#include "swarm_opt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return swarm::cli_main(args);
}
