// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "eem/common/error.hpp"

namespace eem::ad {
namespace {

double evaluate(const LossBuilder& build) {
  Graph g(false);
  const double v = build(g).value().item();
  if (!std::isfinite(v)) throw EvaluationError("finite_diff_check: loss evaluated to a non-finite value");
  return v;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  if (!(h > 0.0)) throw DomainError("central_difference: step must be positive");
  const double up = f(x + h);
  const double down = f(x - h);
  if (!std::isfinite(up) || !std::isfinite(down)) {
    throw EvaluationError("central_difference: function is not finite near x");
  }
  return (up - down) / (2.0 * h);
}

GradCheckReport finite_diff_check(const LossBuilder& build, ParamStore& params, double h) {
  if (!(h > 0.0)) throw DomainError("finite_diff_check: step must be positive");
  params.zero_grad();
  {
    Graph g;
    Var loss = build(g);
    if (!std::isfinite(loss.value().item())) {
      throw EvaluationError("finite_diff_check: loss evaluated to a non-finite value");
    }
    g.backward(loss);
    g.accumulate_parameter_grads();
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad);
  params.zero_grad();

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = params[pi];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + h;
      const double up = evaluate(build);
      p.value[k] = saved - h;
      const double down = evaluate(build);
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[pi][k], numeric);
      ++report.coordinates;
      if (report.worst_param.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = p.name;
        report.worst_index = k;
        report.worst_analytic = analytic[pi][k];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace eem::ad
