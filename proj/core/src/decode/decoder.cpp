// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/decode/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eem/autodiff/ops.hpp"
#include "eem/common/error.hpp"

namespace eem::decode {

using ad::Graph;
using ad::Tensor;
using ad::Var;

namespace {

Tensor repeat_row(const Tensor& row, std::size_t times) {
  Tensor out = Tensor::matrix(times, row.cols());
  for (std::size_t r = 0; r < times; ++r) std::copy(row.raw(), row.raw() + row.cols(), out.raw() + r * row.cols());
  return out;
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
  Tensor out = Tensor::matrix(rows.size(), t.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= t.rows()) throw IndexError("decode: parent row out of range");
    std::copy(t.raw() + rows[r] * t.cols(), t.raw() + (rows[r] + 1) * t.cols(), out.raw() + r * t.cols());
  }
  return out;
}

class ModelSession final : public DecodeSession {
 public:
  ModelSession(const model::Model& m, const std::vector<TokenId>& src, double lambda) : model_(m), lambda_(lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1], got " + std::to_string(lambda));
    const model::Example ex{-1, src, {}, std::nullopt, std::nullopt};
    const model::Batch batch = model::make_batch(std::span<const model::Example>(&ex, 1));
    Graph g(false);
    const auto p = m.bind(g);
    const auto enc = m.encode(g, p, batch);
    n_ = enc.n;
    mask_ = enc.mask;
    for (std::size_t k = 0; k < 2; ++k) {
      keys_[k] = enc.keys[k].value();
      values_[k] = enc.values[k].value();
    }
    for (const Var& z : m.initial_state(p, enc)) z_.push_back(z.value());
    const model::Control control{lambda};
    if (Var c = m.condition(g, p, batch, control); c.valid()) cond_ = c.value();
  }

  std::size_t source_length() const override { return n_; }

  std::vector<std::vector<double>> step(std::span<const std::size_t> parents, std::span<const TokenId> tokens,
                                        std::vector<StepAttention>* attention) override {
    if (parents.size() != tokens.size() || parents.empty()) {
      throw ContractError("decode step: parents and tokens must be non-empty and of equal length");
    }
    const std::size_t R = parents.size();
    Graph g(false);
    const auto p = model_.bind(g);
    model::Encoded enc;
    enc.n = n_;
    enc.mask = repeat_row(mask_, R);
    for (std::size_t k = 0; k < 2; ++k) {
      enc.keys[k] = g.constant(repeat_row(keys_[k], R));
      enc.values[k] = g.constant(repeat_row(values_[k], R));
    }
    std::vector<Var> z_prev;
    for (const Tensor& z : z_) z_prev.push_back(g.constant(gather_rows(z, parents)));
    std::vector<std::size_t> ids(tokens.begin(), tokens.end());
    Var emb = ad::embedding(p.embedding, ids);
    Var lambda = model_.config().uses_lambda() ? g.constant(Tensor::matrix(R, 1, lambda_)) : Var{};
    Var cond = cond_.empty() ? Var{} : g.constant(repeat_row(cond_, R));
    const auto out = model_.decoder_step(p, enc, z_prev, emb, lambda, cond);
    z_.clear();
    for (const Var& z : out.z) z_.push_back(z.value());
    std::vector<std::vector<double>> logp(R);
    const Tensor& logits = out.logits.value();
    for (std::size_t r = 0; r < R; ++r) logp[r] = ad::log_softmax_values(logits.row(r));
    if (attention != nullptr) {
      attention->assign(R, {});
      for (std::size_t r = 0; r < R; ++r) {
        (*attention)[r].alpha_pos = out.alpha_pos.value().row(r);
        (*attention)[r].alpha_neg = out.alpha_neg.value().row(r);
      }
    }
    return logp;
  }

 private:
  const model::Model& model_;
  double lambda_;
  std::size_t n_ = 0;
  Tensor mask_;
  Tensor keys_[2];
  Tensor values_[2];
  std::vector<Tensor> z_;
  Tensor cond_;
};

struct Hyp {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  bool finished = false;
  std::vector<StepAttention> attention;
};

double ranking_score(const Hyp& h, bool normalize) {
  if (!normalize) return h.logprob;
  const std::size_t count = h.tokens.size() + (h.finished ? 1 : 0);
  return count == 0 ? h.logprob : h.logprob / static_cast<double>(count);
}

// Strict order: higher score first, then lexicographically smaller tokens
// (a finished hypothesis counts EOS as its last token).
bool better(double sa, const Hyp& a, double sb, const Hyp& b) {
  if (sa != sb) return sa > sb;
  auto ta = a.tokens, tb = b.tokens;
  if (a.finished) ta.push_back(text::kEos);
  if (b.finished) tb.push_back(text::kEos);
  return ta < tb;
}

DecodeResult to_result(Hyp h, bool normalize, bool traced) {
  DecodeResult r;
  r.score = ranking_score(h, normalize);
  r.logprob = h.logprob;
  r.finished = h.finished;
  r.tokens = std::move(h.tokens);
  r.traced = traced;
  r.attention = std::move(h.attention);
  return r;
}

}  // namespace

std::unique_ptr<DecodeSession> ModelStepper::start(const std::vector<TokenId>& src, double lambda) const {
  return std::make_unique<ModelSession>(model_, src, lambda);
}

DecodeResult greedy_decode(const StepModel& m, const std::vector<TokenId>& src, double lambda, std::size_t max_len,
                           bool trace) {
  auto session = m.start(src, lambda);
  Hyp h;
  std::size_t parent = 0;
  TokenId prev = text::kSos;
  std::vector<StepAttention> att;
  for (std::size_t t = 0; t < max_len; ++t) {
    const auto logp = session->step(std::span(&parent, 1), std::span(&prev, 1), trace ? &att : nullptr);
    const auto& row = logp[0];
    // max_element returns the first maximum, i.e. the lowest id on ties.
    const auto best = static_cast<TokenId>(std::max_element(row.begin(), row.end()) - row.begin());
    h.logprob += row[best];
    if (trace) h.attention.push_back(att[0]);
    if (best == text::kEos) {
      h.finished = true;
      break;
    }
    h.tokens.push_back(best);
    prev = best;
  }
  return to_result(std::move(h), true, trace);
}

DecodeResult beam_search(const StepModel& m, const std::vector<TokenId>& src, double lambda,
                         const DecodeOptions& opt) {
  if (opt.width == 0) throw ConfigError("beam width must be at least 1");
  if (opt.max_len == 0) throw ConfigError("max_len must be at least 1");
  auto session = m.start(src, lambda);
  const std::size_t V = m.vocab_size();

  std::vector<Hyp> alive(1);
  std::vector<Hyp> done;
  std::vector<std::size_t> parents{0};
  std::vector<TokenId> inputs{text::kSos};
  std::vector<StepAttention> att;

  struct Cand {
    std::size_t parent;
    TokenId token;
    double logprob;
  };
  std::vector<Cand> cands;
  for (std::size_t t = 0; t < opt.max_len && !alive.empty(); ++t) {
    const auto logp = session->step(parents, inputs, opt.trace ? &att : nullptr);
    cands.clear();
    for (std::size_t i = 0; i < alive.size(); ++i) {
      for (TokenId v = 0; v < V; ++v) cands.push_back({i, v, alive[i].logprob + logp[i][v]});
    }
    auto cand_better = [&](const Cand& a, const Cand& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      // Equal scores: compare full sequences (parent prefix, then token).
      const auto& pa = alive[a.parent].tokens;
      const auto& pb = alive[b.parent].tokens;
      if (pa != pb) return pa < pb;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(opt.width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), cand_better);

    std::vector<Hyp> next;
    parents.clear();
    inputs.clear();
    for (std::size_t k = 0; k < keep; ++k) {
      const Cand& c = cands[k];
      Hyp h;
      h.tokens = alive[c.parent].tokens;
      h.logprob = c.logprob;
      if (opt.trace) {
        h.attention = alive[c.parent].attention;
        h.attention.push_back(att[c.parent]);
      }
      if (c.token == text::kEos) {
        h.finished = true;
        done.push_back(std::move(h));
        continue;
      }
      h.tokens.push_back(c.token);
      parents.push_back(c.parent);
      inputs.push_back(c.token);
      next.push_back(std::move(h));
    }
    alive = std::move(next);
  }
  for (auto& h : alive) done.push_back(std::move(h));

  std::size_t best = 0;
  for (std::size_t i = 1; i < done.size(); ++i) {
    if (better(ranking_score(done[i], opt.length_normalize), done[i], ranking_score(done[best], opt.length_normalize),
               done[best])) {
      best = i;
    }
  }
  return to_result(std::move(done[best]), opt.length_normalize, opt.trace);
}

AttentionTrace attention_trace(const DecodeResult& result) {
  if (!result.traced) throw ContractError("attention_trace: decode ran without tracing");
  AttentionTrace t;
  for (const auto& s : result.attention) {
    t.alpha_pos.push_back(s.alpha_pos);
    t.alpha_neg.push_back(s.alpha_neg);
  }
  return t;
}

nlohmann::json trace_to_json(const DecodeResult& result, const std::vector<TokenId>& src, const text::Vocab& vocab) {
  const auto t = attention_trace(result);
  auto generated = text::decode(result.tokens, vocab);
  if (result.finished) generated.push_back(text::kEosToken);
  return {{"source_tokens", text::decode(src, vocab)},
          {"generated_tokens", generated},
          {"alpha_pos", t.alpha_pos},
          {"alpha_neg", t.alpha_neg}};
}

}  // namespace eem::decode
