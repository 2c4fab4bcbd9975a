// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

namespace eem::model {

/// Architectures sharing the encoder / attention / decoder skeleton.
enum class Arch {
  kEem,             // dual attention + dual decoder + lambda
  kEncDec,          // single attention, single decoder
  kEmbS2,           // encdec + embedded s2 as an extra decoder input
  kEmbDelta,        // encdec + embedded delta_norm
  kEemNoDualAttn,   // one shared attention head, dual decoder
  kEemNoDualDec,    // dual attention, one decoder
};

/// Source of lambda during training for the dual architectures.
enum class LambdaMode {
  kLearned,  // mu-gated blend of s2 and delta_norm
  kS2,       // lambda = s2
  kDelta,    // lambda = delta_norm
};

const char* to_string(Arch a);
const char* to_string(LambdaMode m);
/// Throw ConfigError on unknown names.
Arch parse_arch(const std::string& name);
LambdaMode parse_lambda_mode(const std::string& name);

struct ModelConfig {
  Arch arch = Arch::kEem;
  LambdaMode lambda_mode = LambdaMode::kLearned;
  std::size_t d_emb = 64;
  std::size_t d_h = 128;
  std::size_t d_z = 128;
  std::size_t layers = 2;
  std::size_t vocab = 0;
  std::size_t max_decode_len = 20;

  bool dual_attention() const { return arch == Arch::kEem || arch == Arch::kEemNoDualDec; }
  bool dual_decoder() const { return arch == Arch::kEem || arch == Arch::kEemNoDualAttn; }
  /// True for the three EEM variants, where lambda blends two branches.
  bool uses_lambda() const { return dual_attention() || dual_decoder(); }
  bool has_lambda_net() const { return uses_lambda() && lambda_mode == LambdaMode::kLearned; }
  bool conditioned() const { return arch == Arch::kEmbS2 || arch == Arch::kEmbDelta; }
  /// Whether training needs (s2, delta_norm) annotations.
  bool needs_annotation() const { return uses_lambda() || conditioned(); }

  /// Throws ConfigError when a dimension is zero.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

}  // namespace eem::model
