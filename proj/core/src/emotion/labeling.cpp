// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/emotion/labeling.hpp"

#include <cmath>

#include "eem/common/error.hpp"

namespace eem::emotion {
namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

double delta_s_norm(double s1, double s2) {
  if (!in_unit(s1) || !in_unit(s2)) {
    throw DomainError("delta_s_norm: scores must lie in [0, 1], got s1=" + std::to_string(s1) +
                      " s2=" + std::to_string(s2));
  }
  return (s2 - s1 + 1.0) / 2.0;
}

Polarity discretize_polarity(double s) {
  if (!in_unit(s)) throw DomainError("discretize_polarity: score " + std::to_string(s) + " outside [0, 1]");
  if (s < kNegativeBelow) return Polarity::kNegative;
  if (s < kPositiveFrom) return Polarity::kNeutral;
  return Polarity::kPositive;
}

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::kNegative:
      return "negative";
    case Polarity::kNeutral:
      return "neutral";
    case Polarity::kPositive:
      return "positive";
  }
  return "?";
}

text::Corpus label_corpus(text::Corpus corpus, const LexiconScorer& scorer) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& t = corpus[i];
    for (const auto* s : {&t.s1, &t.s2}) {
      if (s->has_value() && !in_unit(**s)) {
        throw DataError("record " + std::to_string(i) + ": precomputed score " + std::to_string(**s) +
                        " outside [0, 1]");
      }
    }
    if (!t.s1) t.s1 = scorer.score(t.u1);
    if (!t.s2) t.s2 = scorer.score(t.u2);
    t.delta_norm = delta_s_norm(*t.s1, *t.s2);
  }
  return corpus;
}

nlohmann::json DistributionStats::to_json() const {
  auto row = [](const std::array<double, 3>& f) {
    return nlohmann::json{{"negative", f[0]}, {"neutral", f[1]}, {"positive", f[2]}};
  };
  return {{"records", records}, {"s1", row(s1)}, {"s2", row(s2)}};
}

DistributionStats distribution_stats(const text::Corpus& corpus) {
  if (corpus.empty()) throw DataError("distribution_stats: empty corpus");
  DistributionStats st;
  std::array<std::size_t, 3> c1{}, c2{};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i];
    if (!t.s1 || !t.s2) throw DataError("distribution_stats: record " + std::to_string(i) + " is unlabeled");
    ++c1[static_cast<std::size_t>(discretize_polarity(*t.s1))];
    ++c2[static_cast<std::size_t>(discretize_polarity(*t.s2))];
  }
  st.records = corpus.size();
  const auto n = static_cast<double>(corpus.size());
  for (std::size_t k = 0; k < 3; ++k) {
    st.s1[k] = static_cast<double>(c1[k]) / n;
    st.s2[k] = static_cast<double>(c2[k]) / n;
  }
  return st;
}

}  // namespace eem::emotion
