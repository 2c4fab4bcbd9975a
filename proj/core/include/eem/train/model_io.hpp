// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "eem/autodiff/adam.hpp"
#include "eem/model/model.hpp"

namespace eem::train {

/// A model restored from disk with the metadata saved alongside it.
struct LoadedModel {
  model::Model model;
  /// Ids of the records the model was trained on.
  std::set<std::int64_t> train_ids;
  /// Free-form provenance (run config, input hashes, ...).
  nlohmann::json provenance;
  /// sha256 of the checkpoint file.
  std::string hash;
};

/// Checkpoint bytes for `model`. The header records the model config, the
/// training record ids and `provenance`.
std::string serialize_model(const model::Model& model, const std::set<std::int64_t>& train_ids,
                            const nlohmann::json& provenance, const ad::AdamState* adam = nullptr);

void save_model(const std::filesystem::path& path, const model::Model& model,
                const std::set<std::int64_t>& train_ids, const nlohmann::json& provenance,
                const ad::AdamState* adam = nullptr);

/// Throws DataError when the file is missing, malformed, or its
/// parameters do not fit the recorded config.
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace eem::train
