// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "eem/autodiff/adam.hpp"
#include "eem/autodiff/param_store.hpp"

namespace eem::ad {

/// Seed and draw counter of the generator that produced a checkpoint.
struct RngRecord {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
};

/// Everything a checkpoint file carries.
///
/// Layout: the 8-byte magic "EEMCKPT1", a little-endian u64 header length,
/// a JSON header (meta, rng, parameter names and shapes, optional Adam
/// hyperparameters and step), then raw little-endian doubles for every
/// parameter in header order followed by the Adam first and second moments.
/// Doubles are stored bit-for-bit, so save/load round trips are exact.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  RngRecord rng;
  ParamStore params;
  std::optional<AdamState> adam;
};

std::string serialize_checkpoint(const ParamStore& params, const AdamState* adam, const RngRecord& rng,
                                 const nlohmann::json& meta);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const AdamState* adam,
                     const RngRecord& rng, const nlohmann::json& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies values from `src` into the same-named parameters of `dst`.
/// Throws DataError when names or shapes disagree.
void assign_params(ParamStore& dst, const ParamStore& src);

}  // namespace eem::ad
