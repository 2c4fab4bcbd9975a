// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "eem/text/triplet.hpp"

namespace eem::text {

using TokenId = std::size_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kSos = 2;
inline constexpr TokenId kEos = 3;
inline constexpr std::size_t kNumSpecials = 4;

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kSosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kSepToken = "<sep>";

/// Token <-> id bijection with PAD=0, UNK=1, SOS=2, EOS=3.
class Vocab {
 public:
  /// Specials only.
  Vocab();
  /// From an id-ordered token list whose first four entries are the specials.
  explicit Vocab(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Copy extended by a trailing separator token (the simulator's input joiner).
  Vocab with_separator() const;
  /// Id of kSepToken; throws ContractError if absent.
  TokenId sep() const;

  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Frequency-ranked vocabulary over all utterances; ties break
/// lexicographically; keeps the top (cap - 4) tokens after the specials.
/// Throws DataError on an empty corpus, ConfigError when cap < 5.
Vocab build_vocab(const Corpus& corpus, std::size_t cap);

/// Unknown tokens map to UNK.
std::vector<TokenId> encode(const Tokens& tokens, const Vocab& vocab);
/// Throws IndexError on an out-of-range id.
Tokens decode(const std::vector<TokenId>& ids, const Vocab& vocab);

}  // namespace eem::text
