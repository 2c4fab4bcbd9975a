// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/text/preprocess.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace eem::text {
namespace {

// UTF-8 sequences mapped to ASCII stand-ins.
constexpr std::array<std::pair<std::string_view, std::string_view>, 12> kPunctuationMap{{
    {"\xE2\x80\x98", "'"},    // left single quote
    {"\xE2\x80\x99", "'"},    // right single quote
    {"\xE2\x80\x9A", "'"},    // low single quote
    {"\xE2\x80\x9C", "\""},   // left double quote
    {"\xE2\x80\x9D", "\""},   // right double quote
    {"\xE2\x80\x9E", "\""},   // low double quote
    {"\xE2\x80\x93", "-"},    // en dash
    {"\xE2\x80\x94", "-"},    // em dash
    {"\xE2\x80\x95", "-"},    // horizontal bar
    {"\xE2\x80\xA6", "..."},  // ellipsis
    {"\xC2\xA0", " "},        // no-break space
    {"\xE2\x80\x8B", ""},     // zero-width space
}};

std::string map_punctuation(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool mapped = false;
    for (const auto& [from, to] : kPunctuationMap) {
      if (s.substr(i, from.size()) == from) {
        out += to;
        i += from.size();
        mapped = true;
        break;
      }
    }
    if (!mapped) out.push_back(s[i++]);
  }
  return out;
}

std::string lowercase_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

bool opens_tag(const std::string& s, std::size_t i) {
  if (s[i] != '<' || i + 1 >= s.size()) return false;
  const char c = s[i + 1];
  return (c >= 'a' && c <= 'z') || c == '/' || c == '!';
}

// Removes markup tags such as <b>, </i> or <!-- x -->.
std::string strip_tags(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (opens_tag(s, i)) {
      const std::size_t close = s.find('>', i + 1);
      const std::size_t reopen = s.find('<', i + 1);
      if (close != std::string::npos && (reopen == std::string::npos || reopen > close)) {
        out.push_back(' ');
        i = close;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

// Removes HTML entities such as &amp; or &#39;.
std::string strip_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      std::size_t j = i + 1;
      if (j < s.size() && s[j] == '#') ++j;
      const std::size_t start = j;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == ';' && j > start) {
        out.push_back(' ');
        i = j;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

bool is_link(std::string_view tok) {
  for (std::string_view prefix : {"http://", "https://", "www.", "/r/", "/u/", "r/", "u/"}) {
    if (tok.substr(0, prefix.size()) == prefix && (prefix.size() > 2 || tok.size() > prefix.size())) return true;
  }
  return tok.find("://") != std::string_view::npos;
}

std::string drop_links_and_collapse(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      std::string_view tok(s.data() + i, j - i);
      if (!is_link(tok)) {
        if (!out.empty()) out.push_back(' ');
        out.append(tok);
      }
    }
    i = j;
  }
  return out;
}

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::string cur(raw);
  // Each pass only shrinks or rewrites to ASCII, so iterating to a fixpoint
  // terminates and makes the function idempotent by construction.
  for (;;) {
    std::string next = drop_links_and_collapse(strip_entities(strip_tags(lowercase_ascii(map_punctuation(cur)))));
    if (next == cur) return next;
    cur = std::move(next);
  }
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::exchange(word, {}));
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      word.push_back(c);
    }
  }
  flush();
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

bool is_ascii(std::string_view s) {
  for (char c : s) {
    if (static_cast<unsigned char>(c) >= 0x80) return false;
  }
  return true;
}

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::kNone: return "kept";
    case DropReason::kEmpty: return "empty_utterance";
    case DropReason::kTooLong: return "too_long";
    case DropReason::kNonAscii: return "non_ascii";
  }
  return "unknown";
}

DropReason filter_triplet(const Triplet& t) {
  for (const Tokens* u : {&t.u1, &t.r1, &t.u2}) {
    for (const auto& tok : *u) {
      if (!is_ascii(tok)) return DropReason::kNonAscii;
    }
  }
  for (const Tokens* u : {&t.u1, &t.r1, &t.u2}) {
    if (u->empty()) return DropReason::kEmpty;
    if (u->size() > kMaxUtteranceTokens) return DropReason::kTooLong;
  }
  return DropReason::kNone;
}

Triplet preprocess(const RawTriplet& raw) {
  Triplet t;
  t.id = raw.id;
  t.u1 = tokenize(normalize_text(raw.u1));
  t.r1 = tokenize(normalize_text(raw.r1));
  t.u2 = tokenize(normalize_text(raw.u2));
  t.s1 = raw.s1;
  t.s2 = raw.s2;
  t.extra = raw.extra;
  return t;
}

}  // namespace eem::text
