#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

extern "C" void on_sigint(int) { robustapi::cli::interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);
  return robustapi::cli::run(argc, argv, std::cout, std::cerr);
}
