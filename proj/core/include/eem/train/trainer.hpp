// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eem/autodiff/adam.hpp"
#include "eem/model/model.hpp"

namespace eem::train {

struct TrainConfig {
  /// Upper bound on passes over the data; early stopping may end sooner.
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  /// Epochs without a validation improvement before stopping. 0 disables.
  std::size_t patience = 3;
  /// Hard cap on optimizer steps. 0 means no cap.
  std::size_t max_steps = 0;
  /// Steps between checkpoint callbacks. 0 disables them.
  std::size_t checkpoint_every = 0;
  /// Global gradient norm cap. 0 disables clipping.
  double clip_norm = 5.0;
  /// Train the generator only on records with s2 - s1 > 0 and s2 > 0.5.
  bool positive_only = false;

  /// Throws ConfigError on non-positive sizes or rates.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Overrides fields of `base` with the keys present in `j`; unknown keys
/// raise ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// One row of the loss curve. valid_ppl is set on the last step of each
/// epoch when a validation set exists.
struct LossPoint {
  std::size_t step = 0;
  double train_nll = 0.0;  // mean per target token over the batch
  std::optional<double> valid_ppl;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_ppl = 0.0;
  std::optional<double> valid_ppl;
};

struct TrainResult {
  std::vector<LossPoint> curve;
  std::vector<EpochStats> epochs;
  std::size_t steps = 0;
  std::optional<double> best_valid_ppl;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  bool stopped_by_hook = false;
  /// Set when a non-finite loss or gradient stopped training. The model
  /// then holds the parameters from before the failing step.
  std::optional<std::string> aborted;
};

struct TrainHooks {
  std::function<void(const EpochStats&)> on_epoch;
  /// Checked after each epoch; returning true ends training.
  std::function<bool(const EpochStats&)> stop;
  std::function<void(const model::Model&, const ad::AdamState&, std::size_t step)> on_checkpoint;
};

/// Mini-batch teacher-forced training with Adam.
///
/// Each epoch visits `train` in an order shuffled from (seed, epoch). With
/// a validation set, the parameters of the best validation epoch are
/// restored at the end. Throws DataError when `train` is empty.
TrainResult train(model::Model& model, std::span<const model::Example> train, std::span<const model::Example> valid,
                  const TrainConfig& config, const TrainHooks& hooks = {});

/// exp(total NLL / total target tokens), EOS included. Records are put in
/// a canonical order first, so the result does not depend on input order.
/// Throws DataError on an empty set.
double perplexity(const model::Model& model, std::span<const model::Example> examples,
                  const model::Control& control = {}, std::size_t batch_size = 64);

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before scaling.
double clip_gradients(ad::ParamStore& params, double max_norm);

/// Records with s2 - s1 > 0 and s2 > 0.5.
text::Corpus positive_subset(const text::Corpus& corpus);

/// Loss curve as CSV with header "step,train_nll,valid_ppl".
void write_loss_csv(std::ostream& out, const std::vector<LossPoint>& curve);

}  // namespace eem::train
