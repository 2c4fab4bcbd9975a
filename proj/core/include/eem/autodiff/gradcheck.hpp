// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "eem/autodiff/graph.hpp"
#include "eem/autodiff/param_store.hpp"

namespace eem::ad {

/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
double relative_error(double analytic, double numeric);

/// (f(x + h) - f(x - h)) / 2h. Throws EvaluationError if f is not finite.
double central_difference(const std::function<double(double)>& f, double x, double h);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Builds a scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Var(Graph&)>;

/// Compares reverse-mode gradients of `build` against central differences
/// over every coordinate of every parameter in `params`. Parameter values are
/// restored exactly afterwards and their grad buffers are left zeroed.
GradCheckReport finite_diff_check(const LossBuilder& build, ParamStore& params, double h = 1e-4);

}  // namespace eem::ad
