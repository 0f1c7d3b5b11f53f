#include <string>
#include <vector>

#include "zsml/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return zsml::cli::dispatch(args);
}
