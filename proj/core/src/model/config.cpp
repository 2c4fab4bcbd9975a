// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/model/config.hpp"

#include <array>
#include <utility>

#include "eem/common/error.hpp"

namespace eem::model {
namespace {

constexpr std::array<std::pair<Arch, const char*>, 6> kArchNames{{
    {Arch::kEem, "eem"},
    {Arch::kEncDec, "encdec"},
    {Arch::kEmbS2, "emb_s2"},
    {Arch::kEmbDelta, "emb_delta"},
    {Arch::kEemNoDualAttn, "eem_no_dual_attn"},
    {Arch::kEemNoDualDec, "eem_no_dual_dec"},
}};

constexpr std::array<std::pair<LambdaMode, const char*>, 3> kModeNames{{
    {LambdaMode::kLearned, "learned"},
    {LambdaMode::kS2, "s2"},
    {LambdaMode::kDelta, "delta"},
}};

}  // namespace

const char* to_string(Arch a) {
  for (const auto& [k, v] : kArchNames) {
    if (k == a) return v;
  }
  return "?";
}

const char* to_string(LambdaMode m) {
  for (const auto& [k, v] : kModeNames) {
    if (k == m) return v;
  }
  return "?";
}

Arch parse_arch(const std::string& name) {
  for (const auto& [k, v] : kArchNames) {
    if (name == v) return k;
  }
  throw ConfigError("unknown arch '" + name +
                    "' (expected eem, encdec, emb_s2, emb_delta, eem_no_dual_attn or eem_no_dual_dec)");
}

LambdaMode parse_lambda_mode(const std::string& name) {
  for (const auto& [k, v] : kModeNames) {
    if (name == v) return k;
  }
  throw ConfigError("unknown lambda_mode '" + name + "' (expected learned, s2 or delta)");
}

void ModelConfig::validate() const {
  const std::pair<const char*, std::size_t> dims[] = {{"d_emb", d_emb}, {"d_h", d_h},       {"d_z", d_z},
                                                      {"layers", layers}, {"vocab", vocab}, {"max_decode_len", max_decode_len}};
  for (const auto& [name, v] : dims) {
    if (v == 0) throw ConfigError(std::string("model config: ") + name + " must be at least 1");
  }
  if (vocab < 5) throw ConfigError("model config: vocab must include the 4 specials and at least one word");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"arch", to_string(c.arch)}, {"lambda_mode", to_string(c.lambda_mode)},
          {"d_emb", c.d_emb},          {"d_h", c.d_h},
          {"d_z", c.d_z},              {"layers", c.layers},
          {"vocab", c.vocab},          {"max_decode_len", c.max_decode_len}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      if (k == "arch") c.arch = parse_arch(it->get<std::string>());
      else if (k == "lambda_mode") c.lambda_mode = parse_lambda_mode(it->get<std::string>());
      else if (k == "d_emb") c.d_emb = it->get<std::size_t>();
      else if (k == "d_h") c.d_h = it->get<std::size_t>();
      else if (k == "d_z") c.d_z = it->get<std::size_t>();
      else if (k == "layers") c.layers = it->get<std::size_t>();
      else if (k == "vocab") c.vocab = it->get<std::size_t>();
      else if (k == "max_decode_len") c.max_decode_len = it->get<std::size_t>();
      else throw ConfigError("model config: unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

}  // namespace eem::model
