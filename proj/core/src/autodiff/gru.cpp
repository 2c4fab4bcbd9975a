// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/gru.hpp"

#include "eem/autodiff/ops.hpp"
#include "eem/common/error.hpp"

namespace eem::ad {

GruParamIds register_gru(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_dim, Rng& rng) {
  GruParamIds ids;
  ids.input_dim = input_dim;
  ids.hidden_dim = hidden_dim;
  ids.W = store.add_uniform(prefix + ".W", {3 * hidden_dim, input_dim}, input_dim, rng);
  ids.U = store.add_uniform(prefix + ".U", {3 * hidden_dim, hidden_dim}, hidden_dim, rng);
  ids.b = store.add_uniform(prefix + ".b", {1, 3 * hidden_dim}, hidden_dim, rng);
  return ids;
}

GruWeights bind_gru(Graph& g, ParamStore& store, const GruParamIds& ids) {
  return {g.param(store[ids.W]), g.param(store[ids.U]), g.param(store[ids.b])};
}

Var gru_cell(Var x, Var h, const GruWeights& w) {
  const std::size_t hidden = w.U.cols();
  if (w.W.rows() != 3 * hidden || w.U.rows() != 3 * hidden || w.b.cols() != 3 * hidden) {
    throw DimensionError("gru_cell: inconsistent gate parameter shapes");
  }
  if (h.cols() != hidden || x.rows() != h.rows()) {
    throw DimensionError("gru_cell: state " + shape_string({h.rows(), h.cols()}) + " / input " +
                         shape_string({x.rows(), x.cols()}) + " do not match hidden size " + std::to_string(hidden));
  }
  Var gx = add_bias(linear(x, w.W), w.b);
  Var gh = linear(h, w.U);
  Var r = sigmoid(add(slice_cols(gx, 0, hidden), slice_cols(gh, 0, hidden)));
  Var u = sigmoid(add(slice_cols(gx, hidden, hidden), slice_cols(gh, hidden, hidden)));
  Var n = tanh(add(slice_cols(gx, 2 * hidden, hidden), mul(r, slice_cols(gh, 2 * hidden, hidden))));
  return add(mul(one_minus(u), n), mul(u, h));
}

}  // namespace eem::ad
