// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <vector>

#include "eem/autodiff/param_store.hpp"

namespace eem::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moments per parameter plus the step counter.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  AdamState() = default;
  AdamState(AdamConfig cfg, const ParamStore& params);
};

/// Bias-corrected Adam update from the gradients held in `params`.
///
/// All gradients are validated before any parameter moves, so a NaN/Inf
/// gradient raises OptimizerError (naming the parameter) and leaves both
/// the parameters and the state untouched.
void adam_step(ParamStore& params, AdamState& state);

}  // namespace eem::ad
