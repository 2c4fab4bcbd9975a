// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <set>

#include "eem/text/triplet.hpp"

namespace eem::text {

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;

  /// Throws ConfigError unless all fractions are in [0, 1] and sum to 1.
  void validate() const;
};

struct Splits {
  Corpus train;
  Corpus valid;
  Corpus test;
};

/// Seeded partition. Sizes are round(n * train), round(n * valid) and the
/// remainder; each part keeps the input's relative order.
Splits split_corpus(const Corpus& corpus, const SplitSpec& spec, std::uint64_t seed);

/// Assigns id = position to every record whose id is unset.
void assign_missing_ids(Corpus& corpus);

std::set<std::int64_t> id_set(const Corpus& corpus);

/// Throws ContractError naming both roles and one shared id when two id
/// sets intersect. Records without ids (< 0) are rejected as unverifiable.
void require_disjoint(const std::set<std::int64_t>& a, const char* a_role, const std::set<std::int64_t>& b,
                      const char* b_role);

}  // namespace eem::text
