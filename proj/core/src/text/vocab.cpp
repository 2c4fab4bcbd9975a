// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/text/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "eem/common/error.hpp"

namespace eem::text {

Vocab::Vocab() : Vocab(std::vector<std::string>{kPadToken, kUnkToken, kSosToken, kEosToken}) {}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const char* specials[] = {kPadToken, kUnkToken, kSosToken, kEosToken};
  if (tokens_.size() < kNumSpecials) throw DataError("vocab: fewer entries than special tokens");
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (tokens_[i] != specials[i]) throw DataError("vocab: entry " + std::to_string(i) + " must be " + specials[i]);
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw DataError("vocab: duplicate token '" + tokens_[i] + "'");
  }
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw IndexError("vocab: id " + std::to_string(id) + " outside vocabulary of " + std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

Vocab Vocab::with_separator() const {
  if (contains(kSepToken)) return *this;
  auto tokens = tokens_;
  tokens.emplace_back(kSepToken);
  return Vocab(std::move(tokens));
}

TokenId Vocab::sep() const {
  auto it = index_.find(kSepToken);
  if (it == index_.end()) throw ContractError("vocab has no separator token");
  return it->second;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write vocab '" + path.string() + "'");
  for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocab '" + path.string() + "'");
  std::vector<std::string> tokens;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

Vocab build_vocab(const Corpus& corpus, std::size_t cap) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  if (cap <= kNumSpecials) throw ConfigError("build_vocab: cap must exceed the 4 special tokens");
  std::map<std::string, std::size_t> counts;
  for (const auto& t : corpus) {
    for (const Tokens* u : {&t.u1, &t.r1, &t.u2}) {
      for (const auto& tok : *u) ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // std::map iteration is lexicographic, so a stable sort on count alone
  // leaves ties in lexicographic order.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{kPadToken, kUnkToken, kSosToken, kEosToken};
  for (const auto& [tok, n] : ranked) {
    if (tokens.size() >= cap) break;
    tokens.push_back(tok);
  }
  return Vocab(std::move(tokens));
}

std::vector<TokenId> encode(const Tokens& tokens, const Vocab& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

Tokens decode(const std::vector<TokenId>& ids, const Vocab& vocab) {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(vocab.token(id));
  return out;
}

}  // namespace eem::text
