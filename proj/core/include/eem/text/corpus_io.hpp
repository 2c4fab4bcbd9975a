// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "eem/text/preprocess.hpp"
#include "eem/text/triplet.hpp"

namespace eem::text {

// JSON Lines corpora: one object per line with string keys u1, r1, u2 and
// optional numbers s1, s2 (and delta_norm once labeled). Unknown keys are
// preserved in Triplet::extra / RawTriplet::extra.

/// Parses one raw record. Throws DataError naming `line_no` on bad input.
RawTriplet parse_raw_record(const std::string& line, std::size_t line_no);

/// Streams raw records of a JSONL file in order.
void for_each_raw(const std::filesystem::path& path, const std::function<void(RawTriplet&&)>& fn);

/// Reads a prepared corpus whose utterances are space-joined tokens.
Corpus read_corpus(const std::filesystem::path& path);

/// Counts from ingesting a raw corpus.
struct IngestStats {
  std::size_t read = 0;
  std::size_t kept = 0;
  std::size_t dropped_empty = 0;
  std::size_t dropped_too_long = 0;
  std::size_t dropped_non_ascii = 0;

  nlohmann::json to_json() const;
};

/// Normalizes, tokenizes and filters a raw JSONL corpus. Records without an
/// id get their 0-based line ordinal among non-blank records, so ids stay
/// stable across reruns regardless of which records are dropped.
Corpus ingest(const std::filesystem::path& path, IngestStats* stats = nullptr);

nlohmann::json to_json(const Triplet& t);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
void write_corpus(std::ostream& out, const Corpus& corpus);

}  // namespace eem::text
