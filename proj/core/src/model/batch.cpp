// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/model/batch.hpp"

#include <algorithm>

#include "eem/common/error.hpp"

namespace eem::model {

Example generator_example(const text::Triplet& t, const text::Vocab& vocab) {
  return {t.id, text::encode(t.u1, vocab), text::encode(t.r1, vocab), t.s2, t.delta_norm};
}

Example simulator_example(const text::Triplet& t, const text::Vocab& vocab) {
  auto src = text::encode(t.u1, vocab);
  src.push_back(vocab.sep());
  const auto r1 = text::encode(t.r1, vocab);
  src.insert(src.end(), r1.begin(), r1.end());
  return {t.id, std::move(src), text::encode(t.u2, vocab), t.s2, t.delta_norm};
}

std::vector<Example> generator_examples(const text::Corpus& corpus, const text::Vocab& vocab) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& t : corpus) out.push_back(generator_example(t, vocab));
  return out;
}

std::vector<Example> simulator_examples(const text::Corpus& corpus, const text::Vocab& vocab) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& t : corpus) out.push_back(simulator_example(t, vocab));
  return out;
}

Batch make_batch(std::span<const Example* const> examples) {
  if (examples.empty()) throw ContractError("make_batch: empty batch");
  Batch b;
  b.size = examples.size();
  for (const auto* e : examples) {
    if (e->src.empty()) throw ContractError("make_batch: empty source sequence (record " + std::to_string(e->id) + ")");
    b.src_len = std::max(b.src_len, e->src.size());
    b.steps = std::max(b.steps, e->tgt.size() + 1);
  }
  b.src.assign(b.size * b.src_len, text::kPad);
  b.dec_in.assign(b.size * b.steps, text::kPad);
  b.dec_out.assign(b.size * b.steps, text::kPad);
  for (std::size_t r = 0; r < b.size; ++r) {
    const Example& e = *examples[r];
    std::copy(e.src.begin(), e.src.end(), b.src.begin() + static_cast<std::ptrdiff_t>(r * b.src_len));
    b.dec_in[r * b.steps] = text::kSos;
    for (std::size_t t = 0; t < e.tgt.size(); ++t) {
      b.dec_in[r * b.steps + t + 1] = e.tgt[t];
      b.dec_out[r * b.steps + t] = e.tgt[t];
    }
    b.dec_out[r * b.steps + e.tgt.size()] = text::kEos;
    b.src_lengths.push_back(e.src.size());
    b.tgt_lengths.push_back(e.tgt.size() + 1);
    b.target_tokens += e.tgt.size() + 1;
    const bool annotated = e.s2.has_value() && e.delta_norm.has_value();
    b.annotated = b.annotated && annotated;
    b.s2.push_back(annotated ? *e.s2 : 0.5);
    b.delta_norm.push_back(annotated ? *e.delta_norm : 0.5);
  }
  return b;
}

Batch make_batch(std::span<const Example> examples) {
  std::vector<const Example*> ptrs;
  ptrs.reserve(examples.size());
  for (const auto& e : examples) ptrs.push_back(&e);
  return make_batch(std::span<const Example* const>(ptrs));
}

}  // namespace eem::model
