// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
//
// Plain-loop re-implementation of the model forward pass. It shares no code
// with the graph ops and serves as an independent oracle.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eem/model/model.hpp"

namespace eem::testing {

using Vec = std::vector<double>;

class Reference {
 public:
  explicit Reference(const model::Model& m) : m_(m), c_(m.config()) {}

  struct Result {
    double nll = 0.0;
    std::vector<Vec> logits;  // per decoder step
    std::vector<Vec> alpha_pos, alpha_neg;
    double lambda = 0.0;
  };

  /// Teacher-forced pass over one example. `control` overrides lambda.
  Result run(const model::Example& ex, std::optional<double> control = std::nullopt) const {
    Result res;
    // Encoder.
    std::vector<Vec> h(c_.layers, Vec(c_.d_h, 0.0));
    std::vector<Vec> states;
    for (auto tok : ex.src) {
      Vec x = row("embedding", tok);
      for (std::size_t l = 0; l < c_.layers; ++l) {
        h[l] = gru(x, h[l], "encoder.l" + std::to_string(l));
        x = h[l];
      }
      states.push_back(h.back());
    }
    std::vector<Vec> z = h;
    if (c_.d_h != c_.d_z) {
      for (std::size_t l = 0; l < c_.layers; ++l) {
        const std::string b = "bridge.l" + std::to_string(l);
        z[l] = add(matvec(b + ".W", h[l]), row(b + ".b", 0));
      }
    }
    // Lambda / conditioning.
    double lambda = 0.0;
    Vec cond;
    const double s2 = ex.s2.value_or(0.5), dn = ex.delta_norm.value_or(0.5);
    if (c_.uses_lambda()) {
      if (control) {
        lambda = *control;
      } else if (c_.lambda_mode == model::LambdaMode::kS2) {
        lambda = s2;
      } else if (c_.lambda_mode == model::LambdaMode::kDelta) {
        lambda = dn;
      } else {
        const double mu = 1.0 / (1.0 + std::exp(-(scalar("lambda.w1") * s2 + scalar("lambda.w2") * dn +
                                                   scalar("lambda.b"))));
        lambda = mu * s2 + (1.0 - mu) * dn;
      }
    }
    if (c_.conditioned()) {
      const double v = control ? *control : (c_.arch == model::Arch::kEmbS2 ? s2 : dn);
      const auto& W = m_.params().get("cond.W").value;
      cond = row("cond.b", 0);
      for (std::size_t i = 0; i < c_.d_emb; ++i) cond[i] += W[i] * v;
    }
    res.lambda = lambda;
    // Decoder.
    std::vector<text::TokenId> inputs{text::kSos};
    inputs.insert(inputs.end(), ex.tgt.begin(), ex.tgt.end());
    std::vector<text::TokenId> targets(ex.tgt);
    targets.push_back(text::kEos);
    const std::string pos_head = c_.dual_attention() ? "attn.pos" : "attn";
    const std::string neg_head = c_.dual_attention() ? "attn.neg" : "attn";
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      Vec a_pos, a_neg;
      const Vec c_pos = attend(pos_head, states, z.back(), a_pos);
      const Vec c_neg = attend(neg_head, states, z.back(), a_neg);
      const Vec ctx = c_.dual_attention() ? blend(c_pos, c_neg, lambda) : c_pos;
      Vec x = row("embedding", inputs[t]);
      x.insert(x.end(), ctx.begin(), ctx.end());
      x.insert(x.end(), cond.begin(), cond.end());
      std::vector<Vec> next;
      if (c_.dual_decoder()) {
        const auto zp = stack(x, z, "decoder.pos");
        const auto zn = stack(x, z, "decoder.neg");
        for (std::size_t l = 0; l < c_.layers; ++l) next.push_back(blend(zp[l], zn[l], lambda));
      } else {
        next = stack(x, z, "decoder");
      }
      z = next;
      Vec logits = matvec("output.W_o", z.back());
      double mx = logits[0];
      for (double v : logits) mx = std::max(mx, v);
      double se = 0.0;
      for (double v : logits) se += std::exp(v - mx);
      res.nll += -(logits[targets[t]] - mx - std::log(se));
      res.logits.push_back(std::move(logits));
      res.alpha_pos.push_back(a_pos);
      res.alpha_neg.push_back(a_neg);
    }
    return res;
  }

 private:
  static double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  static Vec add(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
  }

  static Vec blend(const Vec& a, const Vec& b, double w) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = w * a[i] + (1.0 - w) * b[i];
    return out;
  }

  double scalar(const std::string& name) const { return m_.params().get(name).value[0]; }

  Vec row(const std::string& name, std::size_t r) const {
    const auto& t = m_.params().get(name).value;
    return Vec(t.raw() + r * t.cols(), t.raw() + (r + 1) * t.cols());
  }

  Vec matvec(const std::string& name, const Vec& x) const {
    const auto& W = m_.params().get(name).value;
    Vec out(W.rows(), 0.0);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      for (std::size_t j = 0; j < W.cols(); ++j) out[i] += W.at(i, j) * x[j];
    }
    return out;
  }

  Vec gru(const Vec& x, const Vec& h, const std::string& p) const {
    const std::size_t n = h.size();
    const Vec gx = add(matvec(p + ".W", x), row(p + ".b", 0));
    const Vec gh = matvec(p + ".U", h);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = sig(gx[i] + gh[i]);
      const double u = sig(gx[n + i] + gh[n + i]);
      const double c = std::tanh(gx[2 * n + i] + r * gh[2 * n + i]);
      out[i] = (1.0 - u) * c + u * h[i];
    }
    return out;
  }

  std::vector<Vec> stack(const Vec& x, const std::vector<Vec>& z, const std::string& prefix) const {
    std::vector<Vec> out;
    Vec in = x;
    for (std::size_t l = 0; l < c_.layers; ++l) {
      out.push_back(gru(in, z[l], prefix + ".l" + std::to_string(l)));
      in = out.back();
    }
    return out;
  }

  Vec attend(const std::string& head, const std::vector<Vec>& states, const Vec& z, Vec& alpha) const {
    const Vec q = matvec(head + ".W_Q", z);
    Vec e;
    for (const auto& h : states) {
      const Vec k = matvec(head + ".W_K", h);
      double dot = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i) dot += k[i] * q[i];
      e.push_back(dot / std::sqrt(static_cast<double>(c_.d_h)));
    }
    double mx = e[0];
    for (double v : e) mx = std::max(mx, v);
    double se = 0.0;
    alpha.assign(e.size(), 0.0);
    for (std::size_t j = 0; j < e.size(); ++j) se += (alpha[j] = std::exp(e[j] - mx));
    for (double& a : alpha) a /= se;
    Vec c(c_.d_h, 0.0);
    for (std::size_t j = 0; j < states.size(); ++j) {
      const Vec v = matvec(head + ".W_V", states[j]);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += alpha[j] * v[i];
    }
    return c;
  }

  const model::Model& m_;
  const model::ModelConfig& c_;
};

}  // namespace eem::testing
