// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <array>

#include <nlohmann/json.hpp>

#include "eem/emotion/lexicon.hpp"
#include "eem/text/triplet.hpp"

namespace eem::emotion {

/// Normalized increment (s2 - s1 + 1) / 2. Throws DomainError outside [0, 1].
double delta_s_norm(double s1, double s2);

enum class Polarity { kNegative = 0, kNeutral = 1, kPositive = 2 };

inline constexpr double kNegativeBelow = 0.35;
inline constexpr double kPositiveFrom = 0.65;

/// Half-open bins: [0, 0.35) negative, [0.35, 0.65) neutral, [0.65, 1] positive.
Polarity discretize_polarity(double s);

const char* to_string(Polarity p);

/// Attaches s1, s2 and delta_norm to every record, in order. Precomputed
/// scores win over the scorer. Throws DataError naming the record index
/// when a precomputed score is outside [0, 1].
text::Corpus label_corpus(text::Corpus corpus, const LexiconScorer& scorer);

/// Fractions of negative, neutral, positive records.
struct DistributionStats {
  std::size_t records = 0;
  std::array<double, 3> s1{};
  std::array<double, 3> s2{};

  nlohmann::json to_json() const;
};

/// Throws DataError on an empty or unlabeled corpus.
DistributionStats distribution_stats(const text::Corpus& corpus);

}  // namespace eem::emotion
