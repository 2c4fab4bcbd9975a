// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/model/model.hpp"

#include <cmath>
#include <string>

#include "eem/autodiff/ops.hpp"
#include "eem/common/error.hpp"
#include "eem/common/rng.hpp"

namespace eem::model {

using ad::Graph;
using ad::Tensor;
using ad::Var;

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::string layer_name(const std::string& prefix, std::size_t l) { return prefix + ".l" + std::to_string(l); }

Var column(Graph& g, const std::vector<double>& values) {
  Tensor t = Tensor::matrix(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) t[i] = values[i];
  return g.constant(std::move(t));
}

Var token_column_embedding(Var table, const std::vector<TokenId>& grid, std::size_t rows, std::size_t cols,
                           std::size_t col) {
  std::vector<std::size_t> ids(rows);
  for (std::size_t r = 0; r < rows; ++r) ids[r] = grid[r * cols + col];
  return ad::embedding(table, ids);
}

}  // namespace

LambdaValue compute_lambda(double s2, double delta_norm, double w1, double w2, double b) {
  if (!in_unit(s2) || !in_unit(delta_norm)) {
    throw DomainError("compute_lambda: s2 and delta_norm must lie in [0, 1], got s2=" + std::to_string(s2) +
                      " delta_norm=" + std::to_string(delta_norm));
  }
  LambdaValue v;
  v.mu = sigmoid(w1 * s2 + w2 * delta_norm + b);
  v.lambda = v.mu * s2 + (1.0 - v.mu) * delta_norm;
  return v;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const auto& c = config_;
  Rng rng(seed);
  embedding_ = params_.add_uniform("embedding", {c.vocab, c.d_emb}, c.d_emb, rng);
  for (std::size_t l = 0; l < c.layers; ++l) {
    encoder_.push_back(ad::register_gru(params_, layer_name("encoder", l), l == 0 ? c.d_emb : c.d_h, c.d_h, rng));
  }
  if (c.d_h != c.d_z) {
    for (std::size_t l = 0; l < c.layers; ++l) {
      const auto base = layer_name("bridge", l);
      const auto W = params_.add_uniform(base + ".W", {c.d_z, c.d_h}, c.d_h, rng);
      const auto b = params_.add_uniform(base + ".b", {1, c.d_z}, c.d_h, rng);
      bridge_.emplace_back(W, b);
    }
  }
  const std::vector<std::string> head_names =
      c.dual_attention() ? std::vector<std::string>{"attn.pos", "attn.neg"} : std::vector<std::string>{"attn"};
  for (const auto& h : head_names) {
    HeadIds ids{};
    ids.W_K = params_.add_uniform(h + ".W_K", {c.d_h, c.d_h}, c.d_h, rng);
    ids.W_V = params_.add_uniform(h + ".W_V", {c.d_h, c.d_h}, c.d_h, rng);
    ids.W_Q = params_.add_uniform(h + ".W_Q", {c.d_h, c.d_z}, c.d_z, rng);
    heads_.push_back(ids);
  }
  if (c.has_lambda_net()) {
    w1_ = params_.add_uniform("lambda.w1", {1, 1}, 2, rng);
    w2_ = params_.add_uniform("lambda.w2", {1, 1}, 2, rng);
    lambda_b_ = params_.add_uniform("lambda.b", {1, 1}, 2, rng);
  }
  if (c.conditioned()) {
    cond_W_ = params_.add_uniform("cond.W", {c.d_emb, 1}, 1, rng);
    cond_b_ = params_.add_uniform("cond.b", {1, c.d_emb}, 1, rng);
  }
  const std::size_t dec_in = c.d_emb + c.d_h + (c.conditioned() ? c.d_emb : 0);
  const std::vector<std::string> dec_names = c.dual_decoder() ? std::vector<std::string>{"decoder.pos", "decoder.neg"}
                                                              : std::vector<std::string>{"decoder"};
  for (const auto& d : dec_names) {
    std::vector<ad::GruParamIds> stack;
    for (std::size_t l = 0; l < c.layers; ++l) {
      stack.push_back(ad::register_gru(params_, layer_name(d, l), l == 0 ? dec_in : c.d_z, c.d_z, rng));
    }
    decoders_.push_back(std::move(stack));
  }
  W_o_ = params_.add_uniform("output.W_o", {c.vocab, c.d_z}, c.d_z, rng);
}

BoundParams Model::bind(Graph& g) const {
  // Binding only records pointers; the graph never writes parameter values.
  auto& store = const_cast<ad::ParamStore&>(params_);
  BoundParams p;
  p.embedding = g.param(store[embedding_]);
  for (const auto& ids : encoder_) p.encoder.push_back(ad::bind_gru(g, store, ids));
  for (const auto& [W, b] : bridge_) p.bridge.emplace_back(g.param(store[W]), g.param(store[b]));
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& ids = heads_[std::min(k, heads_.size() - 1)];
    p.heads[k] = {g.param(store[ids.W_K]), g.param(store[ids.W_V]), g.param(store[ids.W_Q])};
    for (const auto& layer : decoders_[std::min(k, decoders_.size() - 1)]) {
      p.decoders[k].push_back(ad::bind_gru(g, store, layer));
    }
  }
  if (w1_) {
    p.w1 = g.param(store[*w1_]);
    p.w2 = g.param(store[*w2_]);
    p.lambda_b = g.param(store[*lambda_b_]);
  }
  if (cond_W_) {
    p.cond_W = g.param(store[*cond_W_]);
    p.cond_b = g.param(store[*cond_b_]);
  }
  p.W_o = g.param(store[W_o_]);
  return p;
}

Encoded Model::encode(Graph& g, const BoundParams& p, const Batch& batch) const {
  const std::size_t B = batch.size;
  const std::size_t n = batch.src_len;
  for (std::size_t r = 0; r < B; ++r) {
    if (batch.src_lengths[r] == 0) throw ContractError("encode: empty source sequence");
  }
  if (n == 0) throw ContractError("encode: empty source sequence");
  const auto& c = config_;
  Encoded enc;
  enc.n = n;
  enc.mask = Tensor::matrix(B, n);
  std::vector<Var> h(c.layers);
  for (auto& v : h) v = g.constant(Tensor::matrix(B, c.d_h));
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> active(B);
    bool all_active = true;
    for (std::size_t r = 0; r < B; ++r) {
      active[r] = t < batch.src_lengths[r] ? 1.0 : 0.0;
      enc.mask.at(r, t) = active[r];
      all_active = all_active && active[r] == 1.0;
    }
    Var m = all_active ? Var{} : column(g, active);
    Var x = token_column_embedding(p.embedding, batch.src, B, n, t);
    for (std::size_t l = 0; l < c.layers; ++l) {
      Var next = ad::gru_cell(x, h[l], p.encoder[l]);
      // Finished rows carry their last real state forward.
      h[l] = all_active ? next : ad::mix(next, h[l], m);
      x = h[l];
    }
    enc.states.push_back(h.back());
  }
  enc.final = h;
  Var rows = ad::reshape(ad::concat_cols(enc.states), B * n, c.d_h);
  const std::size_t n_heads = heads_.size();
  for (std::size_t k = 0; k < n_heads; ++k) {
    enc.keys[k] = ad::reshape(ad::linear(rows, p.heads[k].W_K), B, n * c.d_h);
    enc.values[k] = ad::reshape(ad::linear(rows, p.heads[k].W_V), B, n * c.d_h);
  }
  if (n_heads == 1) {
    enc.keys[1] = enc.keys[0];
    enc.values[1] = enc.values[0];
  }
  return enc;
}

std::vector<Var> Model::initial_state(const BoundParams& p, const Encoded& enc) const {
  if (p.bridge.empty()) return enc.final;
  std::vector<Var> z;
  for (std::size_t l = 0; l < enc.final.size(); ++l) {
    z.push_back(ad::add_bias(ad::linear(enc.final[l], p.bridge[l].first), p.bridge[l].second));
  }
  return z;
}

Var Model::lambda_column(Graph& g, const BoundParams& p, const Batch& batch, const Control& control) const {
  if (!config_.uses_lambda()) return {};
  if (control.value) {
    if (!in_unit(*control.value)) throw DomainError("lambda must lie in [0, 1], got " + std::to_string(*control.value));
    return g.constant(Tensor::matrix(batch.size, 1, *control.value));
  }
  if (!batch.annotated) {
    throw ContractError(std::string("arch ") + to_string(config_.arch) + " needs annotated records (s2, delta_norm)");
  }
  for (std::size_t r = 0; r < batch.size; ++r) {
    if (!in_unit(batch.s2[r]) || !in_unit(batch.delta_norm[r])) {
      throw DomainError("lambda inputs must lie in [0, 1]");
    }
  }
  switch (config_.lambda_mode) {
    case LambdaMode::kS2:
      return column(g, batch.s2);
    case LambdaMode::kDelta:
      return column(g, batch.delta_norm);
    case LambdaMode::kLearned:
      break;
  }
  Var s2 = column(g, batch.s2);
  Var dn = column(g, batch.delta_norm);
  Var mu = ad::sigmoid(ad::add_bias(ad::add(ad::linear(s2, *p.w1), ad::linear(dn, *p.w2)), *p.lambda_b));
  return ad::mix(s2, dn, mu);
}

Var Model::condition(Graph& g, const BoundParams& p, const Batch& batch, const Control& control) const {
  if (!config_.conditioned()) return {};
  Var col;
  if (control.value) {
    if (!in_unit(*control.value)) throw DomainError("lambda must lie in [0, 1], got " + std::to_string(*control.value));
    col = g.constant(Tensor::matrix(batch.size, 1, *control.value));
  } else {
    if (!batch.annotated) {
      throw ContractError(std::string("arch ") + to_string(config_.arch) + " needs annotated records (s2, delta_norm)");
    }
    col = column(g, config_.arch == Arch::kEmbS2 ? batch.s2 : batch.delta_norm);
  }
  return ad::add_bias(ad::linear(col, *p.cond_W), *p.cond_b);
}

AttentionOut Model::dual_attention(const BoundParams& p, const Encoded& enc, Var z_prev_top, Var lambda) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.d_h));
  auto head = [&](std::size_t k) {
    Var q = ad::linear(z_prev_top, p.heads[k].W_Q);
    Var alpha = ad::masked_softmax(ad::attention_scores(q, enc.keys[k], scale), enc.mask);
    return std::pair{alpha, ad::attention_context(alpha, enc.values[k])};
  };
  AttentionOut out;
  auto [a_pos, c_pos] = head(0);
  out.alpha_pos = a_pos;
  if (!config_.dual_attention()) {
    out.alpha_neg = a_pos;
    out.context = c_pos;
    return out;
  }
  auto [a_neg, c_neg] = head(1);
  out.alpha_neg = a_neg;
  out.context = ad::mix(c_pos, c_neg, lambda);
  return out;
}

StepOut Model::decoder_step(const BoundParams& p, const Encoded& enc, const std::vector<Var>& z_prev, Var prev_emb,
                            Var lambda, Var cond) const {
  if (z_prev.size() != config_.layers) {
    throw DimensionError("decoder_step: expected " + std::to_string(config_.layers) + " state layers, got " +
                         std::to_string(z_prev.size()));
  }
  AttentionOut att = dual_attention(p, enc, z_prev.back(), lambda);
  std::vector<Var> parts{prev_emb, att.context};
  if (cond.valid()) parts.push_back(cond);
  Var x = ad::concat_cols(parts);
  auto run_branch = [&](std::size_t k) {
    std::vector<Var> z;
    Var in = x;
    for (std::size_t l = 0; l < config_.layers; ++l) {
      z.push_back(ad::gru_cell(in, z_prev[l], p.decoders[k][l]));
      in = z.back();
    }
    return z;
  };
  StepOut out;
  out.alpha_pos = att.alpha_pos;
  out.alpha_neg = att.alpha_neg;
  if (config_.dual_decoder()) {
    auto zp = run_branch(0);
    auto zn = run_branch(1);
    for (std::size_t l = 0; l < config_.layers; ++l) out.z.push_back(ad::mix(zp[l], zn[l], lambda));
  } else {
    out.z = run_branch(0);
  }
  out.logits = ad::linear(out.z.back(), p.W_o);
  return out;
}

NllResult Model::forward_nll(Graph& g, const Batch& batch, const Control& control) const {
  const BoundParams p = bind(g);
  const Encoded enc = encode(g, p, batch);
  std::vector<Var> z = initial_state(p, enc);
  Var lambda = lambda_column(g, p, batch, control);
  Var cond = condition(g, p, batch, control);
  NllResult res;
  res.tokens = batch.target_tokens;
  std::vector<std::size_t> targets(batch.size);
  std::vector<double> weights(batch.size);
  for (std::size_t t = 0; t < batch.steps; ++t) {
    Var emb = token_column_embedding(p.embedding, batch.dec_in, batch.size, batch.steps, t);
    StepOut out = decoder_step(p, enc, z, emb, lambda, cond);
    for (std::size_t r = 0; r < batch.size; ++r) {
      targets[r] = batch.dec_out[r * batch.steps + t];
      weights[r] = t < batch.tgt_lengths[r] ? 1.0 : 0.0;
    }
    Var term = ad::cross_entropy(out.logits, targets, weights);
    res.loss = res.loss.valid() ? ad::add(res.loss, term) : term;
    z = std::move(out.z);
  }
  return res;
}

std::vector<Tensor> Model::teacher_forced_logits(const Batch& batch, const Control& control) const {
  Graph g(false);
  const BoundParams p = bind(g);
  const Encoded enc = encode(g, p, batch);
  std::vector<Var> z = initial_state(p, enc);
  Var lambda = lambda_column(g, p, batch, control);
  Var cond = condition(g, p, batch, control);
  std::vector<Tensor> logits;
  for (std::size_t t = 0; t < batch.steps; ++t) {
    Var emb = token_column_embedding(p.embedding, batch.dec_in, batch.size, batch.steps, t);
    StepOut out = decoder_step(p, enc, z, emb, lambda, cond);
    logits.push_back(out.logits.value());
    z = std::move(out.z);
  }
  return logits;
}

Model extract_branch(const Model& dual, bool positive) {
  ModelConfig cfg = dual.config();
  if (!cfg.uses_lambda()) throw ContractError("extract_branch: model has a single branch already");
  cfg.arch = Arch::kEncDec;
  Model single(cfg, 0);
  const std::string side = positive ? "pos" : "neg";
  for (auto& param : single.params()) {
    std::string name = param.name;
    if (dual.config().dual_attention() && name.rfind("attn.", 0) == 0) {
      name = "attn." + side + name.substr(4);
    } else if (dual.config().dual_decoder() && name.rfind("decoder.", 0) == 0) {
      name = "decoder." + side + name.substr(7);
    }
    param.value = dual.params().get(name).value;
  }
  return single;
}

void tie_branches(Model& dual) {
  for (auto& param : dual.params()) {
    const auto at = param.name.find(".neg.");
    if (at == std::string::npos) continue;
    param.value = dual.params().get(param.name.substr(0, at) + ".pos." + param.name.substr(at + 5)).value;
  }
}

}  // namespace eem::model
