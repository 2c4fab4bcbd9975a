// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eem/text/triplet.hpp"

namespace eem::text {

/// Valence classes in grammar order; the ground-truth sign is index - 1.
inline constexpr std::size_t kNumValences = 3;
/// Response families: supportive, neutral, dismissive.
inline constexpr std::size_t kNumFamilies = 3;

using Distribution = std::array<double, 3>;

/// Templated generator for (U1, R1, U2) triplets. U1 valence and the R1
/// family are drawn independently; U2 valence is drawn from
/// u2_transition[family][u1 valence]. Templates are pre-tokenized strings
/// with {topic}, {pos} and {neg} slots; the topic is shared by a triplet.
struct SynthGrammar {
  std::string name;
  std::string version;
  std::vector<std::string> valences;
  std::vector<std::string> families;
  Distribution u1_valence_mix{};
  Distribution family_mix{};
  std::array<std::array<Distribution, kNumValences>, kNumFamilies> u2_transition{};
  std::map<std::string, std::vector<std::string>> slots;
  std::array<std::vector<std::string>, kNumValences> u1_templates;
  std::array<std::vector<std::string>, kNumFamilies> r1_templates;
  std::array<std::vector<std::string>, kNumValences> u2_templates;
  /// SHA-256 of the source document.
  std::string hash;

  /// Throws ConfigError on malformed documents, distributions not summing
  /// to 1, unknown slots, or templates that could exceed the length cap.
  static SynthGrammar parse(const std::string& document);
  static SynthGrammar load(const std::filesystem::path& path);
  /// The grammar shipped in the data directory.
  static SynthGrammar load_default();

  /// Analytic class mix of U2 valences implied by the mixes and transitions.
  Distribution expected_u2_mix() const;
  /// E[u2 valence | supportive] - E[u2 valence | dismissive], valence in {-1, 0, 1}.
  double expected_margin() const;
};

/// Whitespace split of a template; slots stay single tokens.
Tokens tokenize_template(const std::string& text);

/// Generates n triplets with ids 0..n-1. Ground truth travels in the
/// extra keys gt_valence_u1, gt_valence_u2 (-1, 0, 1) and r1_family.
/// Deterministic in (grammar, n, seed). Throws ConfigError when n == 0.
Corpus synth_corpus(const SynthGrammar& grammar, std::size_t n, std::uint64_t seed);

/// Mean u2 ground-truth valence of supportive minus dismissive records.
double measured_margin(const Corpus& corpus);

/// Sidecar document describing a generated corpus: grammar identity,
/// expected and measured statistics.
nlohmann::json synth_manifest(const SynthGrammar& grammar, const Corpus& corpus, std::uint64_t seed);

}  // namespace eem::text
