// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "eem/common/error.hpp"
#include "eem/common/rng.hpp"
#include "eem/train/model_io.hpp"
#include "eem/text/split.hpp"
#include "eem/train/trainer.hpp"
#include "support/corpus.hpp"
#include "support/toy.hpp"

namespace eem::train {
namespace {

using model::Arch;
using model::Example;
using model::Model;
using model::ModelConfig;

ModelConfig small_config(Arch arch, std::size_t vocab) {
  ModelConfig c;
  c.arch = arch;
  c.d_emb = 16;
  c.d_h = 32;
  c.d_z = 32;
  c.layers = 1;
  c.vocab = vocab;
  return c;
}

struct Data {
  text::Corpus corpus;
  text::Vocab vocab;
  std::vector<Example> examples;
};

Data synth_data(std::size_t n, std::uint64_t seed) {
  Data d;
  d.corpus = testing::labeled_synth(n, seed);
  d.vocab = text::build_vocab(d.corpus, 1000);
  d.examples = model::generator_examples(d.corpus, d.vocab);
  return d;
}

TEST(TrainConfig, ValidatesAndParses) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);

  const auto parsed = train_config_from_json({{"batch_size", 512}, {"lr", 1e-4}, {"epochs", 5}});
  EXPECT_EQ(parsed.batch_size, 512u);
  EXPECT_EQ(parsed.lr, 1e-4);
  EXPECT_EQ(parsed.patience, 3u);
  EXPECT_THROW(train_config_from_json({{"learning_rate", 1.0}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"lr", "fast"}}), ConfigError);
  EXPECT_EQ(train_config_from_json(parsed.to_json()).to_json(), parsed.to_json());
}

TEST(Perplexity, ZeroOutputProjectionGivesVocabSize) {
  for (auto arch : testing::all_archs()) {
    Model m(testing::toy_config(arch), 3);
    for (double& v : m.params().get("output.W_o").value.data()) v = 0.0;
    const auto ex = testing::toy_examples(9, 3);
    EXPECT_NEAR(perplexity(m, ex), 12.0, 12.0 * 1e-13) << to_string(arch);
  }
}

TEST(Perplexity, AtLeastOneAndOrderInvariant) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Model m(testing::toy_config(Arch::kEem), seed);
    testing::randomize(m, seed, 2.0);
    auto ex = testing::toy_examples(37, seed);
    const double p = perplexity(m, ex, {}, 8);
    EXPECT_GE(p, 1.0);
    Rng rng(seed);
    rng.shuffle(std::span<Example>(ex));
    EXPECT_EQ(perplexity(m, ex, {}, 8), p);
  }
}

TEST(Perplexity, EmptySetIsDataError) {
  Model m(testing::toy_config(Arch::kEncDec), 1);
  EXPECT_THROW(perplexity(m, {}), DataError);
}

TEST(Train, EmptyTrainingSetIsDataError) {
  Model m(testing::toy_config(Arch::kEncDec), 1);
  EXPECT_THROW(train(m, {}, {}, TrainConfig{}), DataError);
}

TEST(Train, OverfitsThirtyTwoTriplets) {
  const auto d = synth_data(32, 5);
  Model m(small_config(Arch::kEem, d.vocab.size()), 5);
  TrainConfig c;
  c.lr = 1e-2;
  c.epochs = 2000;  // one step per epoch
  c.patience = 0;
  TrainHooks hooks;
  hooks.stop = [](const EpochStats& s) { return s.train_ppl < 1.1; };
  const auto r = train(m, d.examples, {}, c, hooks);
  EXPECT_LE(r.steps, 2000u);
  EXPECT_LT(perplexity(m, d.examples), 1.3);
}

TEST(Train, LossFallsOverFirstSteps) {
  const auto d = synth_data(64, 6);
  for (std::uint64_t seed : {1, 2, 3}) {
    Model m(small_config(Arch::kEem, d.vocab.size()), seed);
    TrainConfig c;
    c.seed = seed;
    c.batch_size = 64;
    c.epochs = 10;
    c.lr = 3e-3;
    const auto r = train(m, d.examples, {}, c);
    ASSERT_EQ(r.curve.size(), 10u);
    std::size_t rises = 0;
    for (std::size_t i = 1; i < 10; ++i) rises += r.curve[i].train_nll > r.curve[i - 1].train_nll ? 1 : 0;
    EXPECT_LE(rises, 2u) << "seed " << seed;
    EXPECT_LT(r.curve[9].train_nll, r.curve[0].train_nll);
  }
}

TEST(Train, SameSeedSameCheckpointBytes) {
  const auto d = synth_data(40, 7);
  auto run = [&] {
    Model m(small_config(Arch::kEem, d.vocab.size()), 7);
    TrainConfig c;
    c.seed = 11;
    c.batch_size = 8;
    c.epochs = 2;
    train(m, d.examples, {}, c);
    return serialize_model(m, text::id_set(d.corpus), {});
  };
  const auto a = run();
  EXPECT_EQ(a, run());
  Model fresh(small_config(Arch::kEem, d.vocab.size()), 7);
  EXPECT_NE(a, serialize_model(fresh, text::id_set(d.corpus), {}));
}

TEST(Train, DifferentShuffleSeedsDiverge) {
  const auto d = synth_data(40, 7);
  auto run = [&](std::uint64_t seed) {
    Model m(small_config(Arch::kEncDec, d.vocab.size()), 7);
    TrainConfig c;
    c.seed = seed;
    c.batch_size = 8;
    c.epochs = 1;
    train(m, d.examples, {}, c);
    return serialize_model(m, {}, {});
  };
  EXPECT_NE(run(1), run(2));
}

TEST(Train, NonFiniteLossAbortsWithLastGoodParameters) {
  const auto d = synth_data(16, 8);
  TrainConfig c;
  c.lr = 1e200;
  c.clip_norm = 0.0;
  c.batch_size = 4;
  c.epochs = 50;
  Model m(small_config(Arch::kEem, d.vocab.size()), 8);
  const auto r = train(m, d.examples, {}, c);
  ASSERT_TRUE(r.aborted.has_value());
  // Replaying exactly the completed steps reproduces the retained state.
  Model replay(small_config(Arch::kEem, d.vocab.size()), 8);
  TrainConfig cap = c;
  cap.max_steps = r.steps;
  if (r.steps > 0) train(replay, d.examples, {}, cap);
  EXPECT_EQ(serialize_model(m, {}, {}), serialize_model(replay, {}, {}));
}

TEST(Train, EarlyStoppingRestoresBestEpoch) {
  // Validation targets disagree with the training targets, so validation
  // perplexity rises once the model starts memorizing.
  const auto d = synth_data(48, 9);
  std::vector<Example> tr(d.examples.begin(), d.examples.begin() + 24);
  std::vector<Example> va = tr;
  for (std::size_t i = 0; i < va.size(); ++i) va[i].tgt = d.examples[24 + i].tgt;
  Model m(small_config(Arch::kEncDec, d.vocab.size()), 9);
  TrainConfig c;
  c.lr = 1e-2;
  c.batch_size = 8;
  c.epochs = 60;
  c.patience = 2;
  const auto r = train(m, tr, va, c);
  EXPECT_TRUE(r.early_stopped);
  ASSERT_TRUE(r.best_valid_ppl.has_value());
  EXPECT_EQ(r.epochs.size(), r.best_epoch + 2);
  EXPECT_EQ(perplexity(m, va), *r.best_valid_ppl);
  ASSERT_TRUE(r.curve.back().valid_ppl.has_value());
}

TEST(Train, MaxStepsCapsTraining) {
  const auto d = synth_data(40, 10);
  Model m(small_config(Arch::kEncDec, d.vocab.size()), 10);
  TrainConfig c;
  c.batch_size = 8;
  c.epochs = 10;
  c.max_steps = 7;
  std::size_t checkpoints = 0;
  TrainHooks hooks;
  c.checkpoint_every = 3;
  hooks.on_checkpoint = [&](const Model&, const ad::AdamState& s, std::size_t step) {
    ++checkpoints;
    EXPECT_EQ(s.step, step);
  };
  const auto r = train(m, d.examples, {}, c, hooks);
  EXPECT_EQ(r.steps, 7u);
  EXPECT_EQ(checkpoints, 2u);
}

TEST(Train, LossCsv) {
  std::ostringstream out;
  write_loss_csv(out, {{1, 2.5, std::nullopt}, {2, 2.25, 9.0}});
  EXPECT_EQ(out.str(), "step,train_nll,valid_ppl\n1,2.5,\n2,2.25,9\n");
}

TEST(PositiveSubset, KeepsRisingPositiveRecords) {
  text::Corpus c(4);
  c[0].s1 = 0.2, c[0].s2 = 0.7;  // kept
  c[1].s1 = 0.6, c[1].s2 = 0.7;  // kept
  c[2].s1 = 0.1, c[2].s2 = 0.5;  // s2 not above 0.5
  c[3].s1 = 0.9, c[3].s2 = 0.8;  // falling
  for (std::size_t i = 0; i < c.size(); ++i) c[i].id = static_cast<std::int64_t>(i);
  const auto p = positive_subset(c);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].id, 0);
  EXPECT_EQ(p[1].id, 1);
  c[0].s1.reset();
  EXPECT_THROW(positive_subset(c), DataError);
}

TEST(ModelIo, RoundTripKeepsConfigIdsAndValues) {
  Model m(testing::toy_config(Arch::kEmbDelta), 12);
  testing::randomize(m, 12);
  const auto path = std::filesystem::temp_directory_path() / "eem_model_io_test.ckpt";
  save_model(path, m, {3, 1, 2}, {{"note", "x"}});
  const auto loaded = load_model(path);
  EXPECT_EQ(model::to_json(loaded.model.config()), model::to_json(m.config()));
  EXPECT_EQ(loaded.train_ids, (std::set<std::int64_t>{1, 2, 3}));
  EXPECT_EQ(loaded.provenance["note"], "x");
  EXPECT_EQ(loaded.hash.size(), 64u);
  EXPECT_EQ(serialize_model(loaded.model, {1, 2, 3}, {{"note", "x"}}), serialize_model(m, {1, 2, 3}, {{"note", "x"}}));
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), DataError);
}

}  // namespace
}  // namespace eem::train
