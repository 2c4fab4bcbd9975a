// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "eem/common/error.hpp"
#include "eem/common/rng.hpp"

namespace eem::train {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a positive number");
  if (!(clip_norm >= 0.0) || !std::isfinite(clip_norm)) throw ConfigError("clip_norm must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr", lr},
          {"seed", seed},
          {"patience", patience},
          {"max_steps", max_steps},
          {"checkpoint_every", checkpoint_every},
          {"clip_norm", clip_norm},
          {"positive_only", positive_only}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      if (k == "epochs") c.epochs = it->get<std::size_t>();
      else if (k == "batch_size") c.batch_size = it->get<std::size_t>();
      else if (k == "lr") c.lr = it->get<double>();
      else if (k == "seed") c.seed = it->get<std::uint64_t>();
      else if (k == "patience") c.patience = it->get<std::size_t>();
      else if (k == "max_steps") c.max_steps = it->get<std::size_t>();
      else if (k == "checkpoint_every") c.checkpoint_every = it->get<std::size_t>();
      else if (k == "clip_norm") c.clip_norm = it->get<double>();
      else if (k == "positive_only") c.positive_only = it->get<bool>();
      else throw ConfigError("train config: unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  return c;
}

double clip_gradients(ad::ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad.data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : params) {
      for (double& g : p.grad.data()) g *= s;
    }
  }
  return norm;
}

namespace {

std::vector<ad::Tensor> snapshot(const ad::ParamStore& params) {
  std::vector<ad::Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.value);
  return out;
}

void restore(ad::ParamStore& params, const std::vector<ad::Tensor>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = values[i];
}

bool canonical_less(const model::Example* a, const model::Example* b) {
  if (a->src != b->src) return a->src < b->src;
  if (a->tgt != b->tgt) return a->tgt < b->tgt;
  if (a->s2 != b->s2) return a->s2 < b->s2;
  return a->delta_norm < b->delta_norm;
}

}  // namespace

double perplexity(const model::Model& model, std::span<const model::Example> examples, const model::Control& control,
                  std::size_t batch_size) {
  if (examples.empty()) throw DataError("perplexity: empty evaluation set");
  if (batch_size == 0) throw ConfigError("perplexity: batch_size must be positive");
  std::vector<const model::Example*> order;
  order.reserve(examples.size());
  for (const auto& e : examples) order.push_back(&e);
  std::sort(order.begin(), order.end(), canonical_less);

  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - i);
    const auto batch = model::make_batch(std::span<const model::Example* const>(order.data() + i, n));
    ad::Graph g(false);
    const auto r = model.forward_nll(g, batch, control);
    total += r.loss.value()[0];
    tokens += r.tokens;
  }
  return std::exp(total / static_cast<double>(tokens));
}

TrainResult train(model::Model& model, std::span<const model::Example> train_set,
                  std::span<const model::Example> valid, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw DataError("train: empty training set");

  ad::AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;
  ad::AdamState adam(adam_cfg, model.params());
  auto& params = model.params();

  TrainResult result;
  std::vector<ad::Tensor> best;
  std::size_t bad_epochs = 0;
  std::vector<std::size_t> order(train_set.size());
  std::vector<const model::Example*> rows;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(config.seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));

    double epoch_nll = 0.0;
    std::size_t epoch_tokens = 0;
    bool capped = false;
    for (std::size_t i = 0; i < order.size(); i += config.batch_size) {
      if (config.max_steps != 0 && result.steps >= config.max_steps) {
        capped = true;
        break;
      }
      const std::size_t n = std::min(config.batch_size, order.size() - i);
      rows.clear();
      for (std::size_t k = 0; k < n; ++k) rows.push_back(&train_set[order[i + k]]);
      const auto batch = model::make_batch(std::span<const model::Example* const>(rows));

      params.zero_grad();
      ad::Graph g;
      const auto r = model.forward_nll(g, batch);
      const double loss = r.loss.value()[0];
      if (!std::isfinite(loss)) {
        result.aborted = "non-finite loss at step " + std::to_string(result.steps + 1);
        return result;
      }
      g.backward(r.loss);
      g.accumulate_parameter_grads();
      const double inv = 1.0 / static_cast<double>(r.tokens);
      for (auto& p : params) {
        for (double& v : p.grad.data()) v *= inv;
      }
      clip_gradients(params, config.clip_norm);
      try {
        ad::adam_step(params, adam);
      } catch (const OptimizerError& e) {
        result.aborted = std::string(e.what()) + " at step " + std::to_string(result.steps + 1);
        return result;
      }
      ++result.steps;
      epoch_nll += loss;
      epoch_tokens += r.tokens;
      result.curve.push_back({result.steps, loss * inv, std::nullopt});
      if (hooks.on_checkpoint && config.checkpoint_every != 0 && result.steps % config.checkpoint_every == 0) {
        hooks.on_checkpoint(model, adam, result.steps);
      }
    }
    if (epoch_tokens == 0) break;

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_ppl = std::exp(epoch_nll / static_cast<double>(epoch_tokens));
    if (!valid.empty()) {
      const double vp = perplexity(model, valid);
      stats.valid_ppl = vp;
      result.curve.back().valid_ppl = vp;
      if (!result.best_valid_ppl || vp < *result.best_valid_ppl) {
        result.best_valid_ppl = vp;
        result.best_epoch = epoch;
        best = snapshot(params);
        bad_epochs = 0;
      } else {
        ++bad_epochs;
      }
    }
    result.epochs.push_back(stats);
    if (hooks.on_epoch) hooks.on_epoch(stats);
    if (capped) break;
    if (hooks.stop && hooks.stop(stats)) {
      result.stopped_by_hook = true;
      break;
    }
    if (config.patience != 0 && bad_epochs >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (!best.empty()) restore(params, best);
  return result;
}

text::Corpus positive_subset(const text::Corpus& corpus) {
  text::Corpus out;
  for (const auto& t : corpus) {
    if (!t.s1 || !t.s2) throw DataError("positive_subset: record " + std::to_string(t.id) + " is not labeled");
    if (*t.s2 - *t.s1 > 0.0 && *t.s2 > 0.5) out.push_back(t);
  }
  return out;
}

void write_loss_csv(std::ostream& out, const std::vector<LossPoint>& curve) {
  out << "step,train_nll,valid_ppl\n";
  out.precision(17);
  for (const auto& p : curve) {
    out << p.step << ',' << p.train_nll << ',';
    if (p.valid_ppl) out << *p.valid_ppl;
    out << '\n';
  }
}

}  // namespace eem::train
