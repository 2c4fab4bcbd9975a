// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <filesystem>
#include <string_view>

namespace eem {

/// Directory holding the shipped grammar and lexicon. The EEM_DATA_DIR
/// environment variable overrides the build-time location.
std::filesystem::path data_dir();

inline std::filesystem::path data_file(std::string_view name) { return data_dir() / name; }

}  // namespace eem
