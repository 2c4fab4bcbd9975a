// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <string>

#include "eem/autodiff/graph.hpp"
#include "eem/autodiff/param_store.hpp"

namespace eem {
class Rng;
}

namespace eem::ad {

/// Store indices of one GRU layer. Gate blocks are stacked in the order
/// reset, update, candidate: W is [3h x in], U is [3h x h], b is [1 x 3h].
struct GruParamIds {
  std::size_t W = 0;
  std::size_t U = 0;
  std::size_t b = 0;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

struct GruWeights {
  Var W;
  Var U;
  Var b;
};

GruParamIds register_gru(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_dim, Rng& rng);

GruWeights bind_gru(Graph& g, ParamStore& store, const GruParamIds& ids);

/// One GRU step with the reset gate applied after the recurrent product:
///   r  = sigmoid(W_r x + U_r h + b_r)
///   u  = sigmoid(W_u x + U_u h + b_u)
///   n  = tanh(W_n x + r * (U_n h) + b_n)
///   h' = (1 - u) * n + u * h
/// x is [B x in], h is [B x hidden]. Throws DimensionError on mismatch.
Var gru_cell(Var x, Var h, const GruWeights& w);

}  // namespace eem::ad
