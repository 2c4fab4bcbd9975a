// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/adam.hpp"

#include <cmath>

#include "eem/common/error.hpp"

namespace eem::ad {

AdamState::AdamState(AdamConfig cfg, const ParamStore& params) : config(cfg) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto& p : params) {
    m.emplace_back(p.value.shape(), 0.0);
    v.emplace_back(p.value.shape(), 0.0);
  }
}

void adam_step(ParamStore& params, AdamState& state) {
  const AdamConfig& c = state.config;
  if (!(c.lr > 0.0)) throw OptimizerError("adam: learning rate must be positive");
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw OptimizerError("adam: state holds " + std::to_string(state.m.size()) + " moments for " +
                         std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    if (!state.m[i].same_shape(p.value) || !p.grad.same_shape(p.value)) {
      throw OptimizerError("adam: shape mismatch for parameter '" + p.name + "'");
    }
    if (!p.grad.all_finite()) throw OptimizerError("adam: non-finite gradient in parameter '" + p.name + "'");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].value.data();
    auto grad = params[i].grad.data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g;
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      value[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace eem::ad
