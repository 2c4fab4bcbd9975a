// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eem::text {

using Tokens = std::vector<std::string>;

/// One (U1, R1, U2) exchange: user message, response, user reaction.
struct Triplet {
  /// Stable record id, used to prove split disjointness. -1 when unassigned.
  std::int64_t id = -1;
  Tokens u1;
  Tokens r1;
  Tokens u2;
  /// Precomputed or labeled positivity scores in [0, 1].
  std::optional<double> s1;
  std::optional<double> s2;
  /// (s2 - s1 + 1) / 2, present once the record is labeled.
  std::optional<double> delta_norm;
  /// Keys carried through untouched (e.g. generator ground truth).
  nlohmann::json extra = nlohmann::json::object();

  bool annotated() const { return s1.has_value() && s2.has_value() && delta_norm.has_value(); }
};

using Corpus = std::vector<Triplet>;

}  // namespace eem::text
