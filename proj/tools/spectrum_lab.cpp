#include <string>
#include <vector>

#include "spectrum/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spectrum::cli::run(args);
}
