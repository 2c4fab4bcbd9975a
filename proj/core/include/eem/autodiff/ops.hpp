// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eem/autodiff/graph.hpp"

namespace eem::ad {

// All ops record onto the graph owning their first operand. Activations are
// B x d matrices with one example per row; "column" operands are B x 1.

/// [m x k] . [k x n]
Var matmul(Var a, Var b);
/// x . w^T for row-batched x [B x in] and weight w [out x in].
Var linear(Var x, Var w);

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
/// x [B x n] plus a broadcast bias row [1 x n].
Var add_bias(Var x, Var bias);
Var scale(Var a, double s);
Var one_minus(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
/// Sum of all entries as a 1 x 1 tensor.
Var sum(Var a);

/// Row-wise convex blend w*a + (1-w)*b with w a B x 1 column (or 1 x 1).
/// Exact at the endpoints: w == 1 returns a bit-for-bit.
Var mix(Var a, Var b, Var w);

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t start, std::size_t len);
/// Same row-major buffer, new 2-d shape.
Var reshape(Var a, std::size_t rows, std::size_t cols);
/// Gathers rows by index; indices may repeat.
Var select_rows(Var a, std::span<const std::size_t> rows);
/// Gathers table rows by token id. Throws IndexError when an id is >= rows.
Var embedding(Var table, std::span<const std::size_t> ids);

/// Row-wise softmax with max subtraction.
Var softmax(Var a);
/// Row-wise softmax restricted to entries where mask == 1 (others get 0).
/// Every row must keep at least one entry.
Var masked_softmax(Var a, const Tensor& mask);

/// Scaled dot products between a query row and each packed key:
/// q [B x d], keys [B x (n*d)] -> scores [B x n] with scores[b][j] =
/// scale * <q[b], keys[b][j*d : (j+1)*d]>.
Var attention_scores(Var q, Var keys, double scale);
/// alpha [B x n], values [B x (n*d)] -> [B x d], the alpha-weighted sum.
Var attention_context(Var alpha, Var values);

/// Sum over rows of weights[b] * (-log softmax(logits[b])[targets[b]]),
/// computed through log-sum-exp. Returns 1 x 1.
Var cross_entropy(Var logits, std::span<const std::size_t> targets, std::span<const double> weights);
/// Single-row convenience form.
Var cross_entropy(Var logits, std::size_t target);

// Plain numeric helpers shared with inference code.

/// Softmax of a vector. Throws DomainError on empty input.
std::vector<double> softmax_values(std::span<const double> x);
/// log softmax of a vector through log-sum-exp.
std::vector<double> log_softmax_values(std::span<const double> x);

}  // namespace eem::ad
