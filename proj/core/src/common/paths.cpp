// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/common/paths.hpp"

#include <cstdlib>

#ifndef EEM_DEFAULT_DATA_DIR
#define EEM_DEFAULT_DATA_DIR "data"
#endif

namespace eem {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("EEM_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return EEM_DEFAULT_DATA_DIR;
}

}  // namespace eem
