#include "commands.hpp"

int main(int argc, char** argv) {
  return peelkit::cli::run(argc, argv);
}
