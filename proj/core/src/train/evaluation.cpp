// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/train/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "eem/common/error.hpp"
#include "eem/common/hash.hpp"
#include "eem/common/rng.hpp"
#include "eem/decode/decoder.hpp"
#include "eem/model/batch.hpp"
#include "eem/text/split.hpp"

namespace eem::train {

SimulatorResult train_user_simulator(const text::Corpus& train_set, const text::Corpus& valid_set,
                                     const std::set<std::int64_t>& generator_train_ids, const text::Vocab& vocab,
                                     model::ModelConfig base, const TrainConfig& config,
                                     const TrainHooks& hooks) {
  text::require_disjoint(text::id_set(train_set), "simulator training", generator_train_ids, "generator training");
  text::require_disjoint(text::id_set(valid_set), "simulator validation", generator_train_ids, "generator training");
  vocab.sep();  // the separator must exist
  base.arch = model::Arch::kEncDec;
  base.vocab = vocab.size();
  model::Model m(base, mix_seed(config.seed, 0x5157));
  const auto train_ex = model::simulator_examples(train_set, vocab);
  const auto valid_ex = model::simulator_examples(valid_set, vocab);
  auto history = train(m, train_ex, valid_ex, config, hooks);
  return {std::move(m), std::move(history)};
}

nlohmann::json ElicitationSummary::to_json() const {
  nlohmann::json j = {{"lambda", lambda},
                      {"records", records},
                      {"mean_s2_hat", mean_s2_hat},
                      {"mean_delta_raw", mean_delta_raw},
                      {"mean_delta_norm", mean_delta_norm},
                      {"empty_responses", empty_responses}};
  if (!details.empty()) {
    auto& arr = j["details"] = nlohmann::json::array();
    for (const auto& r : details) {
      arr.push_back({{"id", r.id},
                     {"response", r.response},
                     {"reaction", r.reaction},
                     {"s1", r.s1},
                     {"s2_hat", r.s2_hat},
                     {"delta_raw", r.delta_raw},
                     {"empty_response", r.empty_response}});
    }
  }
  return j;
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1], got " + std::to_string(lambda));
}

// Runs fn(i) for i in [0, n) on `threads` workers. The first exception is
// rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ElicitationSummary elicitation_eval(const EvalContext& ctx, const text::Corpus& test, double lambda,
                                    const ElicitationOptions& opt) {
  check_lambda(lambda);
  if (test.empty()) throw DataError("elicitation_eval: empty evaluation corpus");
  const auto ids = text::id_set(test);
  if (ctx.generator_train_ids != nullptr) {
    text::require_disjoint(ids, "evaluation", *ctx.generator_train_ids, "generator training");
  }
  if (ctx.simulator_train_ids != nullptr) {
    text::require_disjoint(ids, "evaluation", *ctx.simulator_train_ids, "simulator training");
  }
  const text::TokenId sep = ctx.simulator_vocab.sep();
  decode::DecodeOptions dopt;
  dopt.width = opt.beam_width;
  dopt.max_len = opt.max_len;
  dopt.length_normalize = opt.length_normalize;

  std::vector<RecordEval> results(test.size());
  parallel_for(test.size(), opt.threads, [&](std::size_t i) {
    const auto& t = test[i];
    RecordEval& r = results[i];
    r.id = t.id;
    r.s1 = t.s1 ? *t.s1 : ctx.scorer.score(t.u1);
    const auto out = decode::beam_search(ctx.generator, text::encode(t.u1, ctx.generator_vocab), lambda, dopt);
    r.response = text::decode(out.tokens, ctx.generator_vocab);
    if (r.response.empty()) {
      r.empty_response = true;
      r.s2_hat = 0.5;
    } else {
      auto src = text::encode(t.u1, ctx.simulator_vocab);
      src.push_back(sep);
      for (auto id : text::encode(r.response, ctx.simulator_vocab)) src.push_back(id);
      // The simulator has no lambda input; any valid value works.
      const auto reaction = decode::greedy_decode(ctx.simulator, src, 0.5, opt.simulator_max_len);
      r.reaction = text::decode(reaction.tokens, ctx.simulator_vocab);
      r.s2_hat = ctx.scorer.score(r.reaction);
    }
    r.delta_raw = r.s2_hat - r.s1;
  });

  ElicitationSummary s;
  s.lambda = lambda;
  s.records = results.size();
  double sum_s2 = 0.0, sum_raw = 0.0, sum_norm = 0.0;
  for (const auto& r : results) {
    sum_s2 += r.s2_hat;
    sum_raw += r.delta_raw;
    sum_norm += (r.delta_raw + 1.0) / 2.0;
    if (r.empty_response) ++s.empty_responses;
  }
  const double n = static_cast<double>(results.size());
  s.mean_s2_hat = sum_s2 / n;
  s.mean_delta_raw = sum_raw / n;
  s.mean_delta_norm = sum_norm / n;
  if (opt.keep_records) s.details = std::move(results);
  return s;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y, bool* degenerate) {
  if (x.size() != y.size()) throw DimensionError("spearman: length mismatch");
  if (degenerate != nullptr) *degenerate = false;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (x.size() < 2 || sxx == 0.0 || syy == 0.0) {
    if (degenerate != nullptr) *degenerate = true;
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back(r.to_json());
  return {{"rows", rows_json}, {"spearman", spearman}, {"degenerate", degenerate}};
}

SweepResult lambda_sweep(const EvalContext& ctx, const text::Corpus& test, std::span<const double> grid,
                         const ElicitationOptions& options) {
  for (double l : grid) check_lambda(l);
  if (grid.size() < 3) throw ConfigError("lambda grid needs at least 3 points");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("lambda grid must be ascending");
  SweepResult out;
  std::vector<double> means;
  for (double l : grid) {
    out.rows.push_back(elicitation_eval(ctx, test, l, options));
    means.push_back(out.rows.back().mean_s2_hat);
  }
  out.spearman = spearman(grid, means, &out.degenerate);
  return out;
}

std::string EvalReport::config_hash() const { return sha256_hex(config.dump()); }

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"config", config},
                      {"config_hash", config_hash()},
                      {"generator_hash", generator_hash},
                      {"simulator_hash", simulator_hash}};
  if (ppl) j["ppl"] = *ppl;
  if (elicitation) j["elicitation"] = elicitation->to_json();
  if (sweep) j["sweep"] = sweep->to_json();
  return j;
}

}  // namespace eem::train
