// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eem/autodiff/graph.hpp"
#include "eem/autodiff/gru.hpp"
#include "eem/autodiff/param_store.hpp"
#include "eem/model/batch.hpp"
#include "eem/model/config.hpp"

namespace eem::model {

/// mu = sigmoid(w1 * s2 + w2 * delta + b); lambda = mu * s2 + (1 - mu) * delta.
struct LambdaValue {
  double mu = 0.0;
  double lambda = 0.0;
};

/// Throws DomainError when s2 or delta_norm lies outside [0, 1].
LambdaValue compute_lambda(double s2, double delta_norm, double w1, double w2, double b);

/// Parameters of one attention head as graph nodes.
struct HeadVars {
  ad::Var W_K;  // d_h x d_h
  ad::Var W_V;  // d_h x d_h
  ad::Var W_Q;  // d_h x d_z
};

/// All model parameters bound onto one graph. Single-branch architectures
/// alias heads[1] = heads[0] and decoders[1] = decoders[0].
struct BoundParams {
  ad::Var embedding;
  std::vector<ad::GruWeights> encoder;
  std::vector<std::pair<ad::Var, ad::Var>> bridge;  // empty when d_h == d_z
  HeadVars heads[2];
  std::vector<ad::GruWeights> decoders[2];
  std::optional<ad::Var> w1, w2, lambda_b;
  std::optional<ad::Var> cond_W, cond_b;
  ad::Var W_o;
};

/// Encoder output for a batch. Keys and values are packed per head as
/// B x (n * d_h) so attention is a pair of batched reductions.
struct Encoded {
  std::size_t n = 0;
  ad::Tensor mask;                  // B x n, 1 on real tokens
  std::vector<ad::Var> states;      // top-layer h_j, each B x d_h
  std::vector<ad::Var> final;       // last real state per layer, each B x d_h
  ad::Var keys[2];
  ad::Var values[2];
};

struct AttentionOut {
  ad::Var context;  // B x d_h
  ad::Var alpha_pos;
  ad::Var alpha_neg;
};

struct StepOut {
  std::vector<ad::Var> z;  // combined per-layer state z_t
  ad::Var logits;          // B x V
  ad::Var alpha_pos;
  ad::Var alpha_neg;
};

/// Per-row lambda (or conditioning scalar) for a forward pass. An override
/// replaces the architecture's training-time rule with a fixed value.
struct Control {
  std::optional<double> value;
};

struct NllResult {
  ad::Var loss;  // summed NLL over target tokens, 1 x 1
  std::size_t tokens = 0;
};

/// The EEM network and its baseline / ablation variants.
///
/// Parameter names: embedding; encoder.l{i}.{W,U,b}; bridge.l{i}.{W,b};
/// attn[.pos|.neg].{W_K,W_V,W_Q}; lambda.{w1,w2,b}; cond.{W,b};
/// decoder[.pos|.neg].l{i}.{W,U,b}; output.W_o.
class Model {
 public:
  /// Deterministic initialization from `seed`. Throws ConfigError on an
  /// invalid config.
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  BoundParams bind(ad::Graph& g) const;

  /// Runs the encoder over a padded batch. Throws ContractError when a
  /// source row is empty.
  Encoded encode(ad::Graph& g, const BoundParams& p, const Batch& batch) const;

  /// Initial decoder state: final encoder states, through the bridge if
  /// d_h != d_z.
  std::vector<ad::Var> initial_state(const BoundParams& p, const Encoded& enc) const;

  /// lambda column for the batch under the training rule, or `control`.
  /// Returns an invalid Var for architectures without lambda.
  ad::Var lambda_column(ad::Graph& g, const BoundParams& p, const Batch& batch, const Control& control) const;
  /// Embedded conditioning scalar (emb_s2 / emb_delta), invalid otherwise.
  ad::Var condition(ad::Graph& g, const BoundParams& p, const Batch& batch, const Control& control) const;

  /// Both heads attend with query z_prev; contexts blend by lambda.
  AttentionOut dual_attention(const BoundParams& p, const Encoded& enc, ad::Var z_prev_top, ad::Var lambda) const;

  /// One decoder step from the shared state z_prev.
  StepOut decoder_step(const BoundParams& p, const Encoded& enc, const std::vector<ad::Var>& z_prev,
                       ad::Var prev_emb, ad::Var lambda, ad::Var cond) const;

  /// Teacher-forced summed NLL of the batch targets (EOS included).
  /// Throws ContractError if the architecture needs annotations the batch
  /// lacks and no control value is supplied.
  NllResult forward_nll(ad::Graph& g, const Batch& batch, const Control& control = {}) const;

  /// Teacher-forced logits at every step (rows = batch), for inspection.
  std::vector<ad::Tensor> teacher_forced_logits(const Batch& batch, const Control& control = {}) const;

 private:
  struct HeadIds {
    std::size_t W_K, W_V, W_Q;
  };
  ModelConfig config_;
  ad::ParamStore params_;
  std::size_t embedding_ = 0;
  std::vector<ad::GruParamIds> encoder_;
  std::vector<std::pair<std::size_t, std::size_t>> bridge_;
  std::vector<HeadIds> heads_;
  std::vector<std::vector<ad::GruParamIds>> decoders_;
  std::optional<std::size_t> w1_, w2_, lambda_b_;
  std::optional<std::size_t> cond_W_, cond_b_;
  std::size_t W_o_ = 0;
};

/// Copies the positive (or negative) branch of a dual model into a
/// single-branch encdec model with the same dimensions.
Model extract_branch(const Model& dual, bool positive);

/// Makes the negative branch parameters equal to the positive ones.
void tie_branches(Model& dual);

}  // namespace eem::model
