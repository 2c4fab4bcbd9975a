// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/text/corpus_io.hpp"

#include <fstream>

#include "eem/common/error.hpp"

namespace eem::text {
namespace {

std::optional<double> optional_number(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw DataError("record " + std::to_string(line_no) + ": '" + key + "' is not a number");
  return it->get<double>();
}

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DataError("record " + std::to_string(line_no) + ": missing string key '" + key + "'");
  }
  return it->get<std::string>();
}

constexpr const char* kKnownKeys[] = {"id", "u1", "r1", "u2", "s1", "s2", "delta_norm"};

nlohmann::json extras_of(const nlohmann::json& obj) {
  nlohmann::json extra = nlohmann::json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || it.key() == k;
    if (!known) extra[it.key()] = it.value();
  }
  return extra;
}

}  // namespace

RawTriplet parse_raw_record(const std::string& line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("record " + std::to_string(line_no) + ": malformed JSON: " + e.what());
  }
  if (!obj.is_object()) throw DataError("record " + std::to_string(line_no) + ": not a JSON object");
  RawTriplet r;
  if (auto it = obj.find("id"); it != obj.end() && it->is_number_integer()) r.id = it->get<std::int64_t>();
  r.u1 = required_string(obj, "u1", line_no);
  r.r1 = required_string(obj, "r1", line_no);
  r.u2 = required_string(obj, "u2", line_no);
  r.s1 = optional_number(obj, "s1", line_no);
  r.s2 = optional_number(obj, "s2", line_no);
  r.extra = extras_of(obj);
  return r;
}

void for_each_raw(const std::filesystem::path& path, const std::function<void(RawTriplet&&)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_raw_record(line, line_no));
  }
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  Corpus corpus;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RawTriplet raw = parse_raw_record(line, line_no);
    Triplet t;
    t.id = raw.id;
    t.u1 = tokenize(raw.u1);
    t.r1 = tokenize(raw.r1);
    t.u2 = tokenize(raw.u2);
    t.s1 = raw.s1;
    t.s2 = raw.s2;
    const auto obj = nlohmann::json::parse(line);
    t.delta_norm = optional_number(obj, "delta_norm", line_no);
    t.extra = std::move(raw.extra);
    corpus.push_back(std::move(t));
  }
  return corpus;
}

nlohmann::json IngestStats::to_json() const {
  return {{"read", read},
          {"kept", kept},
          {"dropped", {{"empty", dropped_empty}, {"too_long", dropped_too_long}, {"non_ascii", dropped_non_ascii}}}};
}

Corpus ingest(const std::filesystem::path& path, IngestStats* stats) {
  IngestStats local;
  Corpus corpus;
  std::int64_t ordinal = 0;
  for_each_raw(path, [&](RawTriplet&& raw) {
    ++local.read;
    if (raw.id < 0) raw.id = ordinal;
    ++ordinal;
    Triplet t = preprocess(raw);
    switch (filter_triplet(t)) {
      case DropReason::kNone:
        ++local.kept;
        corpus.push_back(std::move(t));
        break;
      case DropReason::kEmpty:
        ++local.dropped_empty;
        break;
      case DropReason::kTooLong:
        ++local.dropped_too_long;
        break;
      case DropReason::kNonAscii:
        ++local.dropped_non_ascii;
        break;
    }
  });
  if (stats != nullptr) *stats = local;
  return corpus;
}

nlohmann::json to_json(const Triplet& t) {
  nlohmann::json obj = t.extra;
  if (t.id >= 0) obj["id"] = t.id;
  obj["u1"] = join_tokens(t.u1);
  obj["r1"] = join_tokens(t.r1);
  obj["u2"] = join_tokens(t.u2);
  if (t.s1) obj["s1"] = *t.s1;
  if (t.s2) obj["s2"] = *t.s2;
  if (t.delta_norm) obj["delta_norm"] = *t.delta_norm;
  return obj;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& t : corpus) out << to_json(t).dump() << '\n';
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write corpus '" + path.string() + "'");
  write_corpus(out, corpus);
}

}  // namespace eem::text
