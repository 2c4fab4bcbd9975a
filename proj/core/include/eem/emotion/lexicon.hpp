// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "eem/text/triplet.hpp"

namespace eem::emotion {

/// Polarity scorer counting lexicon hits: with P positive and N negative
/// hits, s = 0.5 + 0.5 * (P - N) / max(1, P + N).
class LexiconScorer {
 public:
  /// Throws ConfigError if the sets intersect.
  LexiconScorer(std::set<std::string> positive, std::set<std::string> negative);

  /// Plain text with "[positive]" / "[negative]" section headers, one token
  /// per line. Blank lines and lines starting with '#' are ignored.
  static LexiconScorer parse(const std::string& document);
  static LexiconScorer load(const std::filesystem::path& path);
  static LexiconScorer load_default();

  double score(const text::Tokens& tokens) const;

  const std::set<std::string>& positive() const { return positive_; }
  const std::set<std::string>& negative() const { return negative_; }
  const std::string& hash() const { return hash_; }

 private:
  std::set<std::string> positive_;
  std::set<std::string> negative_;
  std::string hash_;
};

}  // namespace eem::emotion
