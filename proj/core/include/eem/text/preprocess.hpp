// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "eem/text/triplet.hpp"

namespace eem::text {

/// Maximum tokens per utterance; punctuation tokens count.
inline constexpr std::size_t kMaxUtteranceTokens = 20;

/// Lowercases ASCII letters, maps typographic quotes/dashes/ellipses to ASCII,
/// strips URLs, subreddit/user links, HTML tags and entities, and collapses
/// whitespace. Total and idempotent. Other non-ASCII text is kept so the
/// filter can reject it.
std::string normalize_text(std::string_view raw);

/// Splits on whitespace, then splits every ASCII punctuation character off
/// as its own token: "i'm sad!!" -> [i, ', m, sad, !, !].
Tokens tokenize(std::string_view text);

/// Space-joins tokens (the on-disk form of prepared corpora).
std::string join_tokens(const Tokens& tokens);

bool is_ascii(std::string_view s);

enum class DropReason { kNone, kEmpty, kTooLong, kNonAscii };

const char* to_string(DropReason r);

/// Keep/drop decision for a tokenized candidate: drops when any utterance is
/// empty, longer than kMaxUtteranceTokens, or holds a non-ASCII byte.
DropReason filter_triplet(const Triplet& t);

/// Raw utterance strings of one record before preprocessing.
struct RawTriplet {
  std::int64_t id = -1;
  std::string u1;
  std::string r1;
  std::string u2;
  std::optional<double> s1;
  std::optional<double> s2;
  nlohmann::json extra = nlohmann::json::object();
};

/// normalize + tokenize all three utterances.
Triplet preprocess(const RawTriplet& raw);

}  // namespace eem::text
