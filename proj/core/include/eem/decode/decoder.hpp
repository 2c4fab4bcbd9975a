// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "eem/model/model.hpp"
#include "eem/text/vocab.hpp"

namespace eem::decode {

using text::TokenId;

/// Attention weights of one decoded row at one step.
struct StepAttention {
  std::vector<double> alpha_pos;
  std::vector<double> alpha_neg;
};

/// Incremental decoding of one source. The session holds one decoder state
/// per live hypothesis ("row").
class DecodeSession {
 public:
  virtual ~DecodeSession() = default;
  virtual std::size_t source_length() const = 0;
  /// Replaces the rows by `parents[i]`'s state advanced with `tokens[i]`
  /// and returns each new row's log-probabilities over the vocabulary.
  /// The first call uses parents {0} and tokens {SOS}.
  virtual std::vector<std::vector<double>> step(std::span<const std::size_t> parents,
                                                std::span<const TokenId> tokens,
                                                std::vector<StepAttention>* attention) = 0;
};

/// Anything that can score next tokens given a source and lambda.
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::unique_ptr<DecodeSession> start(const std::vector<TokenId>& src, double lambda) const = 0;
};

/// StepModel over a trained network. Single-head models report the same
/// weights under both alpha keys.
class ModelStepper final : public StepModel {
 public:
  explicit ModelStepper(const model::Model& model) : model_(model) {}
  std::size_t vocab_size() const override { return model_.config().vocab; }
  /// Throws DomainError when lambda is outside [0, 1] and ContractError on
  /// an empty source.
  std::unique_ptr<DecodeSession> start(const std::vector<TokenId>& src, double lambda) const override;

 private:
  const model::Model& model_;
};

struct DecodeOptions {
  std::size_t width = 5;
  std::size_t max_len = 20;
  /// Rank finished hypotheses by mean log-probability (EOS counted).
  bool length_normalize = true;
  bool trace = false;
};

struct DecodeResult {
  std::vector<TokenId> tokens;  // EOS stripped
  double logprob = 0.0;         // including the EOS step when finished
  double score = 0.0;           // ranking score
  bool finished = false;        // ended with EOS rather than max_len
  bool traced = false;
  std::vector<StepAttention> attention;  // one entry per decode step
};

/// Argmax decoding; ties go to the lowest token id.
DecodeResult greedy_decode(const StepModel& m, const std::vector<TokenId>& src, double lambda, std::size_t max_len,
                           bool trace = false);

/// Beam search. Candidates are pruned to `width` by cumulative
/// log-probability; a candidate ending in EOS leaves the beam and competes
/// in the final ranking together with hypotheses still open at max_len.
/// Ties break towards the lexicographically smaller token sequence.
/// Throws ConfigError when width == 0 or max_len == 0.
DecodeResult beam_search(const StepModel& m, const std::vector<TokenId>& src, double lambda,
                         const DecodeOptions& options);

/// Step x source weight matrices of a traced decode.
struct AttentionTrace {
  std::vector<std::vector<double>> alpha_pos;
  std::vector<std::vector<double>> alpha_neg;
};

/// Throws ContractError when the decode ran without tracing.
AttentionTrace attention_trace(const DecodeResult& result);

/// JSON dump with source_tokens, generated_tokens, alpha_pos, alpha_neg.
nlohmann::json trace_to_json(const DecodeResult& result, const std::vector<TokenId>& src, const text::Vocab& vocab);

}  // namespace eem::decode
