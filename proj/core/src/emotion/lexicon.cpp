// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/emotion/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "eem/common/error.hpp"
#include "eem/common/hash.hpp"
#include "eem/common/paths.hpp"

namespace eem::emotion {

LexiconScorer::LexiconScorer(std::set<std::string> positive, std::set<std::string> negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {
  for (const auto& w : positive_) {
    if (negative_.count(w)) throw ConfigError("lexicon: '" + w + "' is listed as both positive and negative");
  }
}

LexiconScorer LexiconScorer::parse(const std::string& document) {
  std::set<std::string> pos, neg;
  std::set<std::string>* section = nullptr;
  std::istringstream in(document);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line[0] == '#') continue;
    if (line == "[positive]") {
      section = &pos;
    } else if (line == "[negative]") {
      section = &neg;
    } else if (section == nullptr) {
      throw ConfigError("lexicon line " + std::to_string(line_no) + ": entry before any section header");
    } else {
      section->insert(line);
    }
  }
  LexiconScorer scorer(std::move(pos), std::move(neg));
  scorer.hash_ = sha256_hex(document);
  return scorer;
}

LexiconScorer LexiconScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open lexicon '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

LexiconScorer LexiconScorer::load_default() { return load(data_file("lexicon.txt")); }

double LexiconScorer::score(const text::Tokens& tokens) const {
  long p = 0, n = 0;
  for (const auto& t : tokens) {
    p += positive_.count(t) != 0;
    n += negative_.count(t) != 0;
  }
  return 0.5 + 0.5 * static_cast<double>(p - n) / static_cast<double>(std::max(1L, p + n));
}

}  // namespace eem::emotion
