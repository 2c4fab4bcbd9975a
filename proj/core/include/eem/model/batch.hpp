// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eem/text/triplet.hpp"
#include "eem/text/vocab.hpp"

namespace eem::model {

using text::TokenId;

/// One source -> target training pair. The target excludes EOS; batching
/// appends it.
struct Example {
  std::int64_t id = -1;
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
  std::optional<double> s2;
  std::optional<double> delta_norm;
};

/// u1 -> r1 with the record's annotation.
Example generator_example(const text::Triplet& t, const text::Vocab& vocab);
/// (u1 SEP r1) -> u2. `vocab` must contain the separator.
Example simulator_example(const text::Triplet& t, const text::Vocab& vocab);

std::vector<Example> generator_examples(const text::Corpus& corpus, const text::Vocab& vocab);
std::vector<Example> simulator_examples(const text::Corpus& corpus, const text::Vocab& vocab);

/// Padded, row-major batch. Row b of the decoder is fed SOS + tgt and
/// predicts tgt + EOS.
struct Batch {
  std::size_t size = 0;
  std::size_t src_len = 0;
  std::size_t steps = 0;
  std::vector<TokenId> src;      // size x src_len, PAD beyond src_lengths[b]
  std::vector<TokenId> dec_in;   // size x steps
  std::vector<TokenId> dec_out;  // size x steps
  std::vector<std::size_t> src_lengths;
  std::vector<std::size_t> tgt_lengths;  // including EOS
  std::vector<double> s2;
  std::vector<double> delta_norm;
  bool annotated = true;
  std::size_t target_tokens = 0;
};

/// Throws ContractError on an empty batch or an empty source sequence.
Batch make_batch(std::span<const Example* const> examples);
Batch make_batch(std::span<const Example> examples);

}  // namespace eem::model
