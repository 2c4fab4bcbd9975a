// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include <iostream>
#include <string>
#include <vector>

#include "eem/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eem::cli::dispatch(args, std::cin, std::cout, std::cerr);
}
