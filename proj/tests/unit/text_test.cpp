// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eem/common/error.hpp"
#include "eem/common/rng.hpp"
#include "eem/text/corpus_io.hpp"
#include "eem/text/preprocess.hpp"
#include "eem/text/split.hpp"
#include "eem/text/synth.hpp"
#include "eem/text/vocab.hpp"

namespace eem::text {
namespace {

Tokens T(std::initializer_list<const char*> xs) { return Tokens(xs.begin(), xs.end()); }

Triplet make(Tokens u1, Tokens r1, Tokens u2, std::int64_t id = -1) {
  Triplet t;
  t.id = id;
  t.u1 = std::move(u1);
  t.r1 = std::move(r1);
  t.u2 = std::move(u2);
  return t;
}

TEST(Normalize, Lowercases) { EXPECT_EQ(normalize_text("I'm SO Sad!!"), "i'm so sad!!"); }

TEST(Normalize, StripsUrls) {
  EXPECT_EQ(normalize_text("see https://x.y now"), "see now");
  EXPECT_EQ(normalize_text("go to www.example.com or /r/aww please"), "go to or please");
}

TEST(Normalize, MapsCurlyQuotes) {
  EXPECT_EQ(normalize_text("\xE2\x80\x9Cok\xE2\x80\x9D"), "\"ok\"");
  EXPECT_EQ(normalize_text("it\xE2\x80\x99s fine \xE2\x80\x94 really\xE2\x80\xA6"), "it's fine - really...");
}

TEST(Normalize, StripsMarkupAndCollapsesSpace) {
  EXPECT_EQ(normalize_text("<b>Hi</b>   there&amp;\t you"), "hi there you");
  EXPECT_EQ(normalize_text("a < b and c > d"), "a < b and c > d");
}

TEST(Normalize, IdempotentOnAdversarialInputs) {
  Rng rng(11);
  const std::vector<std::string> pieces{"<", ">", "b", "/", "&", "amp", ";", "#", "http", "://", "x", " ",
                                        "  ", "A", "r/", "u/", "www.", "\xE2\x80\x9C", "\xE2\x80\xA6", "!",
                                        "'", "caf\xC3\xA9", "\t", "<!--", "-->"};
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s;
    const auto len = rng.below(14);
    for (std::uint64_t i = 0; i < len; ++i) s += pieces[rng.below(pieces.size())];
    const auto once = normalize_text(s);
    ASSERT_EQ(normalize_text(once), once) << "input: " << s;
  }
}

TEST(Tokenize, SplitsPunctuation) {
  EXPECT_EQ(tokenize("i'm so sad!!"), T({"i", "'", "m", "so", "sad", "!", "!"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("can you help me?"), T({"can", "you", "help", "me", "?"}));
}

TEST(Tokenize, StableOnJoinedTokens) {
  Rng rng(5);
  const std::vector<std::string> pieces{"a", "bc", "!", "?", "'", " ", "..", "x-y", "(", ")"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (std::uint64_t i = 0, n = rng.below(12); i < n; ++i) s += pieces[rng.below(pieces.size())];
    const auto toks = tokenize(normalize_text(s));
    ASSERT_EQ(tokenize(join_tokens(toks)), toks);
  }
}

TEST(Filter, DropsTooLongEmptyAndNonAscii) {
  Tokens long_u1(21, "w");
  EXPECT_EQ(filter_triplet(make(long_u1, T({"ok"}), T({"ok"}))), DropReason::kTooLong);
  EXPECT_EQ(filter_triplet(make(Tokens(20, "w"), T({"ok"}), T({"ok"}))), DropReason::kNone);
  EXPECT_EQ(filter_triplet(make(T({"hi"}), T({"caf\xC3\xA9"}), T({"ok"}))), DropReason::kNonAscii);
  EXPECT_EQ(filter_triplet(make(T({"hi"}), Tokens{}, T({"ok"}))), DropReason::kEmpty);
  EXPECT_EQ(filter_triplet(make(T({"hi", "!"}), T({"hello"}), T({"thanks"}))), DropReason::kNone);
}

TEST(Filter, PunctuationCountsTowardsTheCap) {
  Tokens u1(19, "w");
  u1.push_back("!");
  u1.push_back("!");
  EXPECT_EQ(filter_triplet(make(u1, T({"ok"}), T({"ok"}))), DropReason::kTooLong);
}

TEST(Vocab, FrequencyOrder) {
  Corpus corpus{make(T({"a", "a"}), T({"b"}), T({"a"}))};
  const auto v = build_vocab(corpus, 6);
  EXPECT_EQ(v.id("a"), 4u);
  EXPECT_EQ(v.id("b"), 5u);
  EXPECT_EQ(v.size(), 6u);
}

TEST(Vocab, LexicographicTieBreak) {
  Corpus corpus{make(T({"y"}), T({"x"}), T({"z", "z"}))};
  const auto v = build_vocab(corpus, 10);
  EXPECT_EQ(v.id("z"), 4u);
  EXPECT_EQ(v.id("x"), 5u);
  EXPECT_EQ(v.id("y"), 6u);
}

TEST(Vocab, CapTruncatesToUnk) {
  Corpus corpus{make(T({"a", "a", "a"}), T({"b", "b"}), T({"c"}))};
  const auto v = build_vocab(corpus, 5);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(encode(T({"a", "c"}), v), (std::vector<TokenId>{4, kUnk}));
}

TEST(Vocab, Errors) {
  EXPECT_THROW(build_vocab(Corpus{}, 10), DataError);
  Corpus corpus{make(T({"a"}), T({"b"}), T({"c"}))};
  EXPECT_THROW(build_vocab(corpus, 4), ConfigError);
  EXPECT_THROW(decode({99}, build_vocab(corpus, 10)), IndexError);
}

TEST(Vocab, RoundTripUnknownAndEos) {
  Corpus corpus{make(T({"hello", "there"}), T({"hi"}), T({"bye"}))};
  const auto v = build_vocab(corpus, 100);
  const auto s = T({"hi", "there", "bye"});
  EXPECT_EQ(decode(encode(s, v), v), s);
  EXPECT_EQ(encode(T({"nope"}), v), std::vector<TokenId>{kUnk});
  EXPECT_EQ(decode({kEos}, v), T({kEosToken}));
}

TEST(Vocab, SeparatorIsAppendedAfterTheLastId) {
  Corpus corpus{make(T({"a"}), T({"b"}), T({"c"}))};
  const auto v = build_vocab(corpus, 100);
  const auto s = v.with_separator();
  EXPECT_EQ(s.size(), v.size() + 1);
  EXPECT_EQ(s.sep(), v.size());
  EXPECT_EQ(s.id("a"), v.id("a"));
  EXPECT_THROW(v.sep(), ContractError);
}

TEST(Vocab, DeterministicAndFileRoundTrip) {
  const auto g = SynthGrammar::load_default();
  const auto corpus = synth_corpus(g, 300, 1);
  const auto a = build_vocab(corpus, 60);
  EXPECT_EQ(a, build_vocab(corpus, 60));
  const auto path = std::filesystem::temp_directory_path() / "eem_text_vocab.txt";
  a.save(path);
  EXPECT_EQ(Vocab::load(path), a);
  std::filesystem::remove(path);
}

TEST(Split, EightOneOne) {
  Corpus corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(make(T({"u"}), T({"r"}), T({"v"}), i));
  const auto s = split_corpus(corpus, {}, 3);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.valid.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(Split, DeterministicDisjointExhaustive) {
  Corpus corpus;
  for (int i = 0; i < 257; ++i) corpus.push_back(make(T({"u"}), T({"r"}), T({"v"}), i));
  const auto a = split_corpus(corpus, {0.7, 0.2, 0.1}, 42);
  const auto b = split_corpus(corpus, {0.7, 0.2, 0.1}, 42);
  EXPECT_EQ(id_set(a.train), id_set(b.train));
  EXPECT_EQ(id_set(a.test), id_set(b.test));
  std::vector<std::int64_t> all;
  for (const auto* part : {&a.train, &a.valid, &a.test}) {
    for (const auto& t : *part) all.push_back(t.id);
    EXPECT_TRUE(std::is_sorted(part->begin(), part->end(), [](auto& x, auto& y) { return x.id < y.id; }));
  }
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], static_cast<std::int64_t>(i));
  EXPECT_NE(id_set(split_corpus(corpus, {0.7, 0.2, 0.1}, 43).test), id_set(a.test));
}

TEST(Split, RejectsBadFractions) {
  Corpus corpus{make(T({"u"}), T({"r"}), T({"v"}))};
  EXPECT_THROW(split_corpus(corpus, {0.8, 0.1, 0.2}, 1), ConfigError);
  EXPECT_THROW(split_corpus(corpus, {1.2, -0.1, -0.1}, 1), ConfigError);
}

TEST(Split, LeakageDetection) {
  EXPECT_NO_THROW(require_disjoint({1, 2}, "a", {3}, "b"));
  EXPECT_THROW(require_disjoint({1, 2}, "generator", {2, 5}, "simulator"), ContractError);
  EXPECT_THROW(require_disjoint({-1}, "generator", {2}, "simulator"), ContractError);
}

TEST(Synth, ByteIdenticalForSameSeed) {
  const auto g = SynthGrammar::load_default();
  std::ostringstream a, b, c;
  write_corpus(a, synth_corpus(g, 500, 7));
  write_corpus(b, synth_corpus(g, 500, 7));
  write_corpus(c, synth_corpus(g, 500, 8));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Synth, TinyCorpusManifestHasNullMargin) {
  const auto g = SynthGrammar::load_default();
  const auto corpus = synth_corpus(g, 1, 7);
  EXPECT_THROW(measured_margin(corpus), DataError);
  const auto manifest = synth_manifest(g, corpus, 7);
  EXPECT_TRUE(manifest["measured"]["supportive_minus_dismissive_u2_valence"].is_null());
  EXPECT_EQ(manifest["records"], 1);
}

TEST(Synth, SupportiveBeatsDismissive) {
  const auto g = SynthGrammar::load_default();
  const auto corpus = synth_corpus(g, 1000, 7);
  // Independent recomputation of the class-conditional means.
  double sum_s = 0, sum_d = 0;
  int n_s = 0, n_d = 0;
  for (const auto& t : corpus) {
    const auto fam = t.extra.at("r1_family").get<std::string>();
    const int v = t.extra.at("gt_valence_u2").get<int>();
    if (fam == "supportive") sum_s += v, ++n_s;
    if (fam == "dismissive") sum_d += v, ++n_d;
  }
  const double margin = sum_s / n_s - sum_d / n_d;
  EXPECT_GT(margin, 0.0);
  EXPECT_DOUBLE_EQ(margin, measured_margin(corpus));
  const auto manifest = synth_manifest(g, corpus, 7);
  EXPECT_DOUBLE_EQ(manifest["measured"]["supportive_minus_dismissive_u2_valence"].get<double>(), margin);
  // Grammar-implied margin, from the shipped tables by hand.
  double e_s = 0, e_d = 0;
  for (std::size_t v = 0; v < 3; ++v) {
    for (std::size_t c = 0; c < 3; ++c) {
      e_s += g.u1_valence_mix[v] * g.u2_transition[0][v][c] * (static_cast<int>(c) - 1);
      e_d += g.u1_valence_mix[v] * g.u2_transition[2][v][c] * (static_cast<int>(c) - 1);
    }
  }
  EXPECT_NEAR(g.expected_margin(), e_s - e_d, 1e-15);
  EXPECT_NEAR(margin, g.expected_margin(), 0.15);
}

TEST(Synth, EveryRecordPassesTheFilter) {
  const auto g = SynthGrammar::load_default();
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const auto& t : synth_corpus(g, 2000, seed)) {
      ASSERT_EQ(filter_triplet(t), DropReason::kNone);
      ASSERT_EQ(tokenize(join_tokens(t.u1)), t.u1);
      ASSERT_EQ(tokenize(join_tokens(t.r1)), t.r1);
      ASSERT_EQ(tokenize(join_tokens(t.u2)), t.u2);
    }
  }
}

TEST(Synth, RejectsZeroCountAndBadGrammar) {
  const auto g = SynthGrammar::load_default();
  EXPECT_THROW(synth_corpus(g, 0, 1), ConfigError);
  EXPECT_THROW(SynthGrammar::parse("{}"), ConfigError);
}

TEST(CorpusIo, RoundTripAndIngestion) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto raw = dir / "eem_text_raw.jsonl";
  {
    std::ofstream out(raw);
    out << R"({"u1":"I'm SO Sad!!","r1":"Oh no <b>really</b>?","u2":"yes https://x.y","s1":0.1})" << '\n';
    out << R"({"u1":"hi","r1":"café","u2":"ok"})" << '\n';
    out << "\n";
    out << R"({"u1":"hi","r1":"","u2":"ok","id":77})" << '\n';
    out << R"({"u1":"fine","r1":"good","u2":"great","tag":"x"})" << '\n';
  }
  IngestStats st;
  auto corpus = ingest(raw, &st);
  EXPECT_EQ(st.read, 4u);
  EXPECT_EQ(st.kept, 2u);
  EXPECT_EQ(st.dropped_non_ascii, 1u);
  EXPECT_EQ(st.dropped_empty, 1u);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].id, 0);
  EXPECT_EQ(corpus[0].u1, T({"i", "'", "m", "so", "sad", "!", "!"}));
  EXPECT_EQ(corpus[0].r1, T({"oh", "no", "really", "?"}));
  EXPECT_EQ(corpus[0].u2, T({"yes"}));
  EXPECT_EQ(*corpus[0].s1, 0.1);
  EXPECT_EQ(corpus[1].id, 3);
  EXPECT_EQ(corpus[1].extra["tag"], "x");

  const auto prepared = dir / "eem_text_prepared.jsonl";
  write_corpus(prepared, corpus);
  const auto back = read_corpus(prepared);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, corpus[i].id);
    EXPECT_EQ(back[i].u1, corpus[i].u1);
    EXPECT_EQ(back[i].r1, corpus[i].r1);
    EXPECT_EQ(back[i].u2, corpus[i].u2);
    EXPECT_EQ(back[i].s1, corpus[i].s1);
  }
  std::filesystem::remove(raw);
  std::filesystem::remove(prepared);
}

TEST(CorpusIo, MalformedRecordNamesLine) {
  const auto path = std::filesystem::temp_directory_path() / "eem_text_bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"u1":"a","r1":"b","u2":"c"})" << '\n' << R"({"u1":"a","r1":3})" << '\n';
  }
  try {
    ingest(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace eem::text
