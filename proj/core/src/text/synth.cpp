// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/text/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "eem/common/error.hpp"
#include "eem/common/hash.hpp"
#include "eem/common/paths.hpp"
#include "eem/common/rng.hpp"
#include "eem/text/preprocess.hpp"

namespace eem::text {

Tokens tokenize_template(const std::string& text) {
  std::istringstream in(text);
  Tokens out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

namespace {

using nlohmann::json;

Distribution read_distribution(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("grammar: " + what + " must list 3 probabilities");
  Distribution d{};
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    d[i] = j.at(i).get<double>();
    if (!(d[i] >= 0.0)) throw ConfigError("grammar: negative probability in " + what);
    total += d[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("grammar: " + what + " does not sum to 1");
  return d;
}

bool is_slot(const std::string& tok) { return tok.size() > 2 && tok.front() == '{' && tok.back() == '}'; }

std::vector<std::string> read_templates(const json& j, const std::string& what,
                                        const std::map<std::string, std::vector<std::string>>& slots) {
  if (!j.is_array() || j.empty()) throw ConfigError("grammar: " + what + " needs at least one template");
  std::vector<std::string> out;
  for (const auto& t : j) {
    auto text = t.get<std::string>();
    auto tokens = tokenize_template(text);
    if (tokens.empty() || tokens.size() > kMaxUtteranceTokens) {
      throw ConfigError("grammar: template '" + text + "' must have 1-20 tokens");
    }
    for (const auto& tok : tokens) {
      if (is_slot(tok) && !slots.count(tok.substr(1, tok.size() - 2))) {
        throw ConfigError("grammar: unknown slot " + tok + " in '" + text + "'");
      }
    }
    out.push_back(std::move(text));
  }
  return out;
}



}  // namespace

SynthGrammar SynthGrammar::parse(const std::string& document) {
  SynthGrammar g;
  try {
    const json j = json::parse(document);
    g.name = j.at("name").get<std::string>();
    g.version = j.at("version").get<std::string>();
    g.valences = j.at("valences").get<std::vector<std::string>>();
    g.families = j.at("families").get<std::vector<std::string>>();
    if (g.valences.size() != kNumValences || g.families.size() != kNumFamilies) {
      throw ConfigError("grammar: expected 3 valences and 3 families");
    }
    g.u1_valence_mix = read_distribution(j.at("u1_valence_mix"), "u1_valence_mix");
    g.family_mix = read_distribution(j.at("family_mix"), "family_mix");
    g.slots = j.at("slots").get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& [slot, words] : g.slots) {
      if (words.empty()) throw ConfigError("grammar: slot {" + slot + "} has no fillers");
      for (const auto& w : words) {
        if (tokenize(w).size() != 1 || tokenize(w)[0] != w) {
          throw ConfigError("grammar: slot filler '" + w + "' must be a single token");
        }
      }
    }
    for (std::size_t f = 0; f < kNumFamilies; ++f) {
      const auto& rows = j.at("u2_transition").at(g.families[f]);
      if (!rows.is_array() || rows.size() != kNumValences) {
        throw ConfigError("grammar: u2_transition." + g.families[f] + " needs 3 rows");
      }
      for (std::size_t v = 0; v < kNumValences; ++v) {
        g.u2_transition[f][v] = read_distribution(rows[v], "u2_transition." + g.families[f]);
      }
      g.r1_templates[f] = read_templates(j.at("r1_templates").at(g.families[f]), "r1." + g.families[f], g.slots);
    }
    for (std::size_t v = 0; v < kNumValences; ++v) {
      g.u1_templates[v] = read_templates(j.at("u1_templates").at(g.valences[v]), "u1." + g.valences[v], g.slots);
      g.u2_templates[v] = read_templates(j.at("u2_templates").at(g.valences[v]), "u2." + g.valences[v], g.slots);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grammar: ") + e.what());
  }
  g.hash = sha256_hex(document);
  return g;
}

SynthGrammar SynthGrammar::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open grammar '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

SynthGrammar SynthGrammar::load_default() { return load(data_file("synth_grammar.json")); }

Distribution SynthGrammar::expected_u2_mix() const {
  Distribution mix{};
  for (std::size_t f = 0; f < kNumFamilies; ++f) {
    for (std::size_t v = 0; v < kNumValences; ++v) {
      for (std::size_t c = 0; c < kNumValences; ++c) {
        mix[c] += family_mix[f] * u1_valence_mix[v] * u2_transition[f][v][c];
      }
    }
  }
  return mix;
}

double SynthGrammar::expected_margin() const {
  auto mean_valence = [&](std::size_t f) {
    double m = 0.0;
    for (std::size_t v = 0; v < kNumValences; ++v) {
      for (std::size_t c = 0; c < kNumValences; ++c) {
        m += u1_valence_mix[v] * u2_transition[f][v][c] * (static_cast<double>(c) - 1.0);
      }
    }
    return m;
  };
  return mean_valence(0) - mean_valence(kNumFamilies - 1);
}

namespace {

Tokens realize(const std::string& tmpl, const std::string& topic,
               const std::map<std::string, std::vector<std::string>>& slots, Rng& rng) {
  Tokens out;
  for (auto& tok : tokenize_template(tmpl)) {
    if (!is_slot(tok)) {
      out.push_back(std::move(tok));
      continue;
    }
    const auto name = tok.substr(1, tok.size() - 2);
    if (name == "topic") {
      out.push_back(topic);
    } else {
      const auto& words = slots.at(name);
      out.push_back(words[rng.below(words.size())]);
    }
  }
  return out;
}

const std::string& pick(const std::vector<std::string>& items, Rng& rng) { return items[rng.below(items.size())]; }

}  // namespace

Corpus synth_corpus(const SynthGrammar& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("synth_corpus: n must be at least 1");
  static const std::vector<std::string> kNoTopic{"thing"};
  const auto& topics = g.slots.count("topic") ? g.slots.at("topic") : kNoTopic;
  Rng rng(seed);
  Corpus corpus;
  corpus.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v1 = rng.categorical(g.u1_valence_mix);
    const auto fam = rng.categorical(g.family_mix);
    const auto v2 = rng.categorical(g.u2_transition[fam][v1]);
    const auto& topic = pick(topics, rng);
    Triplet t;
    t.id = static_cast<std::int64_t>(i);
    t.u1 = realize(pick(g.u1_templates[v1], rng), topic, g.slots, rng);
    t.r1 = realize(pick(g.r1_templates[fam], rng), topic, g.slots, rng);
    t.u2 = realize(pick(g.u2_templates[v2], rng), topic, g.slots, rng);
    t.extra = json{{"gt_valence_u1", static_cast<int>(v1) - 1},
                   {"gt_valence_u2", static_cast<int>(v2) - 1},
                   {"r1_family", g.families[fam]}};
    corpus.push_back(std::move(t));
  }
  return corpus;
}

double measured_margin(const Corpus& corpus) {
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (const auto& t : corpus) {
    const auto fam = t.extra.value("r1_family", std::string());
    const int slot = fam == "supportive" ? 0 : fam == "dismissive" ? 1 : -1;
    if (slot < 0) continue;
    sum[slot] += t.extra.at("gt_valence_u2").get<int>();
    ++count[slot];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw DataError("measured_margin: corpus lacks supportive or dismissive records");
  }
  return sum[0] / static_cast<double>(count[0]) - sum[1] / static_cast<double>(count[1]);
}

nlohmann::json synth_manifest(const SynthGrammar& g, const Corpus& corpus, std::uint64_t seed) {
  std::array<std::size_t, kNumValences> u1{}, u2{};
  for (const auto& t : corpus) {
    ++u1[static_cast<std::size_t>(t.extra.at("gt_valence_u1").get<int>() + 1)];
    ++u2[static_cast<std::size_t>(t.extra.at("gt_valence_u2").get<int>() + 1)];
  }
  const auto n = static_cast<double>(corpus.size());
  json measured_u1 = json::object(), measured_u2 = json::object(), expected_u1 = json::object(),
       expected_u2 = json::object();
  const auto expected = g.expected_u2_mix();
  for (std::size_t v = 0; v < kNumValences; ++v) {
    expected_u1[g.valences[v]] = g.u1_valence_mix[v];
    expected_u2[g.valences[v]] = expected[v];
    measured_u1[g.valences[v]] = static_cast<double>(u1[v]) / n;
    measured_u2[g.valences[v]] = static_cast<double>(u2[v]) / n;
  }
  // Tiny corpora may miss a family; the margin is then unavailable.
  json margin = nullptr;
  try {
    margin = measured_margin(corpus);
  } catch (const DataError&) {
  }
  return json{{"grammar", {{"name", g.name}, {"version", g.version}, {"sha256", g.hash}}},
              {"seed", seed},
              {"records", corpus.size()},
              {"expected", {{"u1_valence_mix", expected_u1}, {"u2_valence_mix", expected_u2},
                            {"supportive_minus_dismissive_u2_valence", g.expected_margin()}}},
              {"measured", {{"u1_valence_mix", measured_u1}, {"u2_valence_mix", measured_u2},
                            {"supportive_minus_dismissive_u2_valence", margin}}}};
}

}  // namespace eem::text
