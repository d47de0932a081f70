//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "pcmforge/commands.hpp"

int main(int argc, char **argv) {
  return pcmforge::cli::run(argc, argv, std::cout, std::cerr);
}
