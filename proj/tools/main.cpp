#include "cli/commands.hpp"

int main(int argc, char** argv) {
  return monster::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
