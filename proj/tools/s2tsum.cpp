// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "s2t/app/commands.hpp"

int main(int argc, char** argv) {
  return s2t::app::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
