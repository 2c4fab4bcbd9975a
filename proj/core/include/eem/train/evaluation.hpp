// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eem/decode/decoder.hpp"
#include "eem/emotion/lexicon.hpp"
#include "eem/model/model.hpp"
#include "eem/text/triplet.hpp"
#include "eem/text/vocab.hpp"
#include "eem/train/trainer.hpp"

namespace eem::train {

struct SimulatorResult {
  model::Model model;
  TrainResult history;
};

/// Trains an encdec user simulator on (u1 SEP r1) -> u2.
///
/// `vocab` must contain the separator. `base` supplies the dimensions; the
/// architecture and vocabulary size are overridden. Throws ContractError
/// when the simulator data shares a record id with `generator_train_ids`.
SimulatorResult train_user_simulator(const text::Corpus& train_set, const text::Corpus& valid_set,
                                     const std::set<std::int64_t>& generator_train_ids, const text::Vocab& vocab,
                                     model::ModelConfig base, const TrainConfig& config,
                                     const TrainHooks& hooks = {});

/// Models and resources shared by every elicitation run. Networks enter
/// through decode::ModelStepper.
struct EvalContext {
  const decode::StepModel& generator;
  const text::Vocab& generator_vocab;
  const decode::StepModel& simulator;
  const text::Vocab& simulator_vocab;
  const emotion::LexiconScorer& scorer;
  /// When set, evaluation records must not appear in these.
  const std::set<std::int64_t>* generator_train_ids = nullptr;
  const std::set<std::int64_t>* simulator_train_ids = nullptr;
};

struct ElicitationOptions {
  std::size_t beam_width = 5;
  std::size_t max_len = 20;
  bool length_normalize = true;
  std::size_t simulator_max_len = 20;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;
  /// Keep per-record responses in the result.
  bool keep_records = false;
};

struct RecordEval {
  std::int64_t id = -1;
  std::vector<std::string> response;
  std::vector<std::string> reaction;
  double s1 = 0.5;
  double s2_hat = 0.5;
  double delta_raw = 0.0;
  bool empty_response = false;
};

struct ElicitationSummary {
  double lambda = 0.0;
  std::size_t records = 0;
  double mean_s2_hat = 0.0;
  double mean_delta_raw = 0.0;
  double mean_delta_norm = 0.0;
  /// Generator responses that were empty; each is scored as neutral.
  std::size_t empty_responses = 0;
  std::vector<RecordEval> details;

  nlohmann::json to_json() const;
};

/// For each record: beam-search response to u1 at `lambda`, greedy
/// simulator reaction to (u1 SEP response), lexicon score of the reaction.
/// Throws DomainError for lambda outside [0, 1], DataError on an empty
/// corpus, ContractError on overlap with the training ids in `ctx`.
ElicitationSummary elicitation_eval(const EvalContext& ctx, const text::Corpus& test, double lambda,
                                    const ElicitationOptions& options = {});

/// Spearman rank correlation with average ranks for ties. Returns 0 and
/// sets `degenerate` when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);

struct SweepResult {
  std::vector<ElicitationSummary> rows;
  double spearman = 0.0;
  bool degenerate = false;

  nlohmann::json to_json() const;
};

/// Elicitation at each grid point plus the rank correlation between lambda
/// and mean s2_hat. The grid must be ascending with at least 3 points
/// (ConfigError); points outside [0, 1] raise DomainError.
SweepResult lambda_sweep(const EvalContext& ctx, const text::Corpus& test, std::span<const double> grid,
                         const ElicitationOptions& options = {});

/// Everything `eval` and `sweep` report, with provenance.
struct EvalReport {
  std::optional<double> ppl;
  std::optional<ElicitationSummary> elicitation;
  std::optional<SweepResult> sweep;
  nlohmann::json config = nlohmann::json::object();
  std::string generator_hash;
  std::string simulator_hash;

  /// sha256 of the compact config dump.
  std::string config_hash() const;
  nlohmann::json to_json() const;
};

}  // namespace eem::train
