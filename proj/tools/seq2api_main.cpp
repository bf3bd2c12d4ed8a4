#include <string>
#include <vector>

#include "seq2api/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return seq2api::cli::run(args);
}
