// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/text/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eem/common/error.hpp"
#include "eem/common/rng.hpp"

namespace eem::text {

void SplitSpec::validate() const {
  for (double f : {train, valid, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  }
  if (std::abs(train + valid + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1 (got " + std::to_string(train + valid + test) + ")");
  }
}

Splits split_corpus(const Corpus& corpus, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = corpus.size();
  const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(n * spec.train)));
  const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(n * spec.valid)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<int> part(n, 2);
  for (std::size_t i = 0; i < n_train; ++i) part[order[i]] = 0;
  for (std::size_t i = n_train; i < n_train + n_valid; ++i) part[order[i]] = 1;

  Splits out;
  for (std::size_t i = 0; i < n; ++i) {
    Corpus* dst = part[i] == 0 ? &out.train : part[i] == 1 ? &out.valid : &out.test;
    dst->push_back(corpus[i]);
  }
  return out;
}

void assign_missing_ids(Corpus& corpus) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].id < 0) corpus[i].id = static_cast<std::int64_t>(i);
  }
}

std::set<std::int64_t> id_set(const Corpus& corpus) {
  std::set<std::int64_t> ids;
  for (const auto& t : corpus) ids.insert(t.id);
  return ids;
}

void require_disjoint(const std::set<std::int64_t>& a, const char* a_role, const std::set<std::int64_t>& b,
                      const char* b_role) {
  for (const auto* s : {&a, &b}) {
    if (!s->empty() && *s->begin() < 0) {
      throw ContractError(std::string("cannot verify split disjointness: ") + (s == &a ? a_role : b_role) +
                          " contains records without ids");
    }
  }
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (auto id : small) {
    if (large.count(id)) {
      throw ContractError(std::string("data leakage: ") + a_role + " and " + b_role + " share record id " +
                          std::to_string(id));
    }
  }
}

}  // namespace eem::text
