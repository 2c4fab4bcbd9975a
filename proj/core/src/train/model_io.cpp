// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/train/model_io.hpp"

#include <fstream>

#include "eem/autodiff/checkpoint.hpp"
#include "eem/common/error.hpp"
#include "eem/common/hash.hpp"

namespace eem::train {

std::string serialize_model(const model::Model& model, const std::set<std::int64_t>& train_ids,
                            const nlohmann::json& provenance, const ad::AdamState* adam) {
  const nlohmann::json meta = {{"model_config", model::to_json(model.config())},
                               {"train_ids", train_ids},
                               {"provenance", provenance}};
  return ad::serialize_checkpoint(model.params(), adam, {}, meta);
}

void save_model(const std::filesystem::path& path, const model::Model& model,
                const std::set<std::int64_t>& train_ids, const nlohmann::json& provenance,
                const ad::AdamState* adam) {
  const std::string bytes = serialize_model(model, train_ids, provenance, adam);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to model '" + path.string() + "'");
}

LoadedModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("checkpoint not found: '" + path.string() + "'");
  auto ck = ad::load_checkpoint(path);
  model::ModelConfig config;
  std::set<std::int64_t> ids;
  try {
    config = model::model_config_from_json(ck.meta.at("model_config"));
    ids = ck.meta.at("train_ids").get<std::set<std::int64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint '" + path.string() + "' lacks model metadata: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError("checkpoint '" + path.string() + "': " + e.what());
  }
  model::Model m(config, 0);
  ad::assign_params(m.params(), ck.params);
  nlohmann::json prov = ck.meta.contains("provenance") ? ck.meta["provenance"] : nlohmann::json::object();
  return {std::move(m), std::move(ids), std::move(prov), sha256_file(path)};
}

}  // namespace eem::train
