// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eem/common/error.hpp"
#include "eigen_map.hpp"

namespace eem::ad {

using detail::mat;

namespace {

std::string dims(const Tensor& t) { return shape_string({t.rows(), t.cols()}); }

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + dims(a) + " vs " + dims(b));
  }
}

Tensor like(const Tensor& t) { return Tensor::uninitialized(t.rows(), t.cols()); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows()) {
    throw DimensionError("matmul: inner dimensions disagree for " + dims(A) + " x " + dims(B));
  }
  Tensor out = Tensor::uninitialized(A.rows(), B.cols());
  mat(out).noalias() = mat(A) * mat(B);
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& G, const Tensor&) {
    if (g.needs_grad(a)) mat(g.grad_of(a)).noalias() += mat(G) * mat(b.value()).transpose();
    if (g.needs_grad(b)) mat(g.grad_of(b)).noalias() += mat(a.value()).transpose() * mat(G);
  });
}

Var linear(Var x, Var w) {
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  if (X.cols() != W.cols()) {
    throw DimensionError("linear: input " + dims(X) + " does not match weight " + dims(W));
  }
  Tensor out = Tensor::uninitialized(X.rows(), W.rows());
  mat(out).noalias() = mat(X) * mat(W).transpose();
  return x.graph().record(std::move(out), {x, w}, [x, w](Graph& g, const Tensor& G, const Tensor&) {
    if (g.needs_grad(x)) mat(g.grad_of(x)).noalias() += mat(G) * mat(w.value());
    if (g.needs_grad(w)) mat(g.grad_of(w)).noalias() += mat(G).transpose() * mat(x.value());
  });
}

Var add(Var a, Var b) {
  require_same("add", a.value(), b.value());
  Tensor out = like(a.value());
  mat(out) = mat(a.value()) + mat(b.value());
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& G, const Tensor&) {
    if (g.needs_grad(a)) mat(g.grad_of(a)) += mat(G);
    if (g.needs_grad(b)) mat(g.grad_of(b)) += mat(G);
  });
}

Var sub(Var a, Var b) {
  require_same("sub", a.value(), b.value());
  Tensor out = like(a.value());
  mat(out) = mat(a.value()) - mat(b.value());
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& G, const Tensor&) {
    if (g.needs_grad(a)) mat(g.grad_of(a)) += mat(G);
    if (g.needs_grad(b)) mat(g.grad_of(b)) -= mat(G);
  });
}

Var mul(Var a, Var b) {
  require_same("mul", a.value(), b.value());
  Tensor out = like(a.value());
  mat(out) = mat(a.value()).cwiseProduct(mat(b.value()));
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& G, const Tensor&) {
    if (g.needs_grad(a)) mat(g.grad_of(a)) += mat(G).cwiseProduct(mat(b.value()));
    if (g.needs_grad(b)) mat(g.grad_of(b)) += mat(G).cwiseProduct(mat(a.value()));
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& X = x.value();
  const Tensor& Bv = bias.value();
  if (Bv.rows() != 1 || Bv.cols() != X.cols()) {
    throw DimensionError("add_bias: bias " + dims(Bv) + " does not broadcast over " + dims(X));
  }
  Tensor out = like(X);
  mat(out) = mat(X).rowwise() + mat(Bv).row(0);
  return x.graph().record(std::move(out), {x, bias}, [x, bias](Graph& g, const Tensor& G, const Tensor&) {
    if (g.needs_grad(x)) mat(g.grad_of(x)) += mat(G);
    if (g.needs_grad(bias)) mat(g.grad_of(bias)).row(0) += mat(G).colwise().sum();
  });
}

Var scale(Var a, double s) {
  Tensor out = like(a.value());
  mat(out) = mat(a.value()) * s;
  return a.graph().record(std::move(out), {a}, [a, s](Graph& g, const Tensor& G, const Tensor&) {
    mat(g.grad_of(a)) += mat(G) * s;
  });
}

Var one_minus(Var a) {
  Tensor out = like(a.value());
  mat(out) = (1.0 - mat(a.value()).array()).matrix();
  return a.graph().record(std::move(out), {a}, [a](Graph& g, const Tensor& G, const Tensor&) {
    mat(g.grad_of(a)) -= mat(G);
  });
}

Var sigmoid(Var a) {
  const Tensor& A = a.value();
  Tensor out = like(A);
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = stable_sigmoid(A[i]);
  return a.graph().record(std::move(out), {a}, [a](Graph& g, const Tensor& G, const Tensor& Y) {
    Tensor& dA = g.grad_of(a);
    for (std::size_t i = 0; i < Y.size(); ++i) dA[i] += G[i] * Y[i] * (1.0 - Y[i]);
  });
}

Var tanh(Var a) {
  const Tensor& A = a.value();
  Tensor out = like(A);
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = std::tanh(A[i]);
  return a.graph().record(std::move(out), {a}, [a](Graph& g, const Tensor& G, const Tensor& Y) {
    Tensor& dA = g.grad_of(a);
    for (std::size_t i = 0; i < Y.size(); ++i) dA[i] += G[i] * (1.0 - Y[i] * Y[i]);
  });
}

Var sum(Var a) {
  Tensor out = Tensor::scalar(mat(a.value()).sum());
  return a.graph().record(std::move(out), {a}, [a](Graph& g, const Tensor& G, const Tensor&) {
    mat(g.grad_of(a)).array() += G[0];
  });
}

Var mix(Var a, Var b, Var w) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const Tensor& W = w.value();
  require_same("mix", A, B);
  if (W.cols() != 1 || (W.rows() != 1 && W.rows() != A.rows())) {
    throw DimensionError("mix: weight " + dims(W) + " must be a column over " + dims(A));
  }
  const std::size_t rows = A.rows();
  const std::size_t cols = A.cols();
  const bool broadcast = W.rows() == 1;
  Tensor out = like(A);
  for (std::size_t r = 0; r < rows; ++r) {
    const double lam = W[broadcast ? 0 : r];
    const double rest = 1.0 - lam;
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = lam * A[r * cols + c] + rest * B[r * cols + c];
  }
  return a.graph().record(std::move(out), {a, b, w}, [a, b, w, rows, cols, broadcast](Graph& g, const Tensor& G, const Tensor&) {
    const Tensor& Wv = w.value();
    if (g.needs_grad(a)) {
      Tensor& dA = g.grad_of(a);
      for (std::size_t r = 0; r < rows; ++r) {
        const double lam = Wv[broadcast ? 0 : r];
        for (std::size_t c = 0; c < cols; ++c) dA[r * cols + c] += lam * G[r * cols + c];
      }
    }
    if (g.needs_grad(b)) {
      Tensor& dB = g.grad_of(b);
      for (std::size_t r = 0; r < rows; ++r) {
        const double rest = 1.0 - Wv[broadcast ? 0 : r];
        for (std::size_t c = 0; c < cols; ++c) dB[r * cols + c] += rest * G[r * cols + c];
      }
    }
    if (g.needs_grad(w)) {
      const Tensor& Av = a.value();
      const Tensor& Bv = b.value();
      Tensor& dW = g.grad_of(w);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += (Av[r * cols + c] - Bv[r * cols + c]) * G[r * cols + c];
        dW[broadcast ? 0 : r] += acc;
      }
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + dims(parts.front().value()) + " vs " + dims(p.value()));
    }
    cols += p.cols();
  }
  Tensor out = Tensor::uninitialized(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    mat(out).middleCols(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(p.cols())) = mat(p.value());
    offset += p.cols();
  }
  return parts.front().graph().record(std::move(out), parts, [parts](Graph& g, const Tensor& G, const Tensor&) {
    std::size_t off = 0;
    for (const Var& p : parts) {
      const auto width = static_cast<Eigen::Index>(p.cols());
      if (g.needs_grad(p)) mat(g.grad_of(p)) += mat(G).middleCols(static_cast<Eigen::Index>(off), width);
      off += p.cols();
    }
  });
}

Var slice_cols(Var a, std::size_t start, std::size_t len) {
  const Tensor& A = a.value();
  if (len == 0 || start + len > A.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                         ") outside " + dims(A));
  }
  Tensor out = Tensor::uninitialized(A.rows(), len);
  mat(out) = mat(A).middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len));
  return a.graph().record(std::move(out), {a}, [a, start, len](Graph& g, const Tensor& G, const Tensor&) {
    mat(g.grad_of(a)).middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) += mat(G);
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  const Tensor& A = a.value();
  if (rows * cols != A.size()) {
    throw DimensionError("reshape: cannot view " + dims(A) + " as " + shape_string({rows, cols}));
  }
  Tensor out = A.reshaped({rows, cols});
  return a.graph().record(std::move(out), {a}, [a](Graph& g, const Tensor& G, const Tensor&) {
    auto dst = g.grad_of(a).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += G[i];
  });
}

Var select_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& A = a.value();
  if (rows.empty()) throw DimensionError("select_rows: empty index list");
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  for (std::size_t r : idx) {
    if (r >= A.rows()) throw IndexError("select_rows: row " + std::to_string(r) + " outside " + dims(A));
  }
  Tensor out = Tensor::uninitialized(idx.size(), A.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    mat(out).row(static_cast<Eigen::Index>(i)) = mat(A).row(static_cast<Eigen::Index>(idx[i]));
  }
  return a.graph().record(std::move(out), {a}, [a, idx = std::move(idx)](Graph& g, const Tensor& G, const Tensor&) {
    auto dA = mat(g.grad_of(a));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      dA.row(static_cast<Eigen::Index>(idx[i])) += mat(G).row(static_cast<Eigen::Index>(i));
    }
  });
}

Var embedding(Var table, std::span<const std::size_t> ids) {
  const Tensor& T = table.value();
  for (std::size_t id : ids) {
    if (id >= T.rows()) {
      throw IndexError("embedding: token id " + std::to_string(id) + " outside table of " + std::to_string(T.rows()) +
                       " rows");
    }
  }
  return select_rows(table, ids);
}

Var softmax(Var a) {
  Tensor mask(a.value().shape(), 1.0);
  return masked_softmax(a, mask);
}

Var masked_softmax(Var a, const Tensor& mask) {
  const Tensor& A = a.value();
  require_same("masked_softmax", A, mask);
  const std::size_t rows = A.rows();
  const std::size_t cols = A.cols();
  Tensor out = like(A);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false, finite = true;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask[r * cols + c] == 0.0) continue;
      any = true;
      finite = finite && std::isfinite(A[r * cols + c]);
      mx = std::max(mx, A[r * cols + c]);
    }
    if (!any) throw DomainError("masked_softmax: row " + std::to_string(r) + " has no active entry");
    // Non-finite scores propagate as NaN so callers see a non-finite loss.
    if (!finite) mx = std::numeric_limits<double>::quiet_NaN();
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      out[i] = mask[i] != 0.0 ? std::exp(A[i] - mx) : 0.0;
      z += out[i];
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= z;
  }
  return a.graph().record(std::move(out), {a}, [a, rows, cols](Graph& g, const Tensor& G, const Tensor& Y) {
    Tensor& dA = g.grad_of(a);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += G[r * cols + c] * Y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t i = r * cols + c;
        dA[i] += Y[i] * (G[i] - dot);
      }
    }
  });
}

Var attention_scores(Var q, Var keys, double scale) {
  const Tensor& Q = q.value();
  const Tensor& K = keys.value();
  const std::size_t d = Q.cols();
  if (K.rows() != Q.rows() || K.cols() % d != 0) {
    throw DimensionError("attention_scores: query " + dims(Q) + " incompatible with packed keys " + dims(K));
  }
  const std::size_t batch = Q.rows();
  const std::size_t n = K.cols() / d;
  const auto ni = static_cast<Eigen::Index>(n);
  const auto di = static_cast<Eigen::Index>(d);
  Tensor out = Tensor::uninitialized(batch, n);
  for (std::size_t b = 0; b < batch; ++b) {
    detail::ConstMatMap kb(K.raw() + b * n * d, ni, di);
    Eigen::Map<const Eigen::VectorXd> qb(Q.raw() + b * d, di);
    Eigen::Map<Eigen::VectorXd> ob(out.raw() + b * n, ni);
    ob.noalias() = scale * (kb * qb);
  }
  return q.graph().record(std::move(out), {q, keys}, [q, keys, scale, batch, n, d](Graph& g, const Tensor& G, const Tensor&) {
    const auto ni = static_cast<Eigen::Index>(n);
    const auto di = static_cast<Eigen::Index>(d);
    const Tensor& Qv = q.value();
    const Tensor& Kv = keys.value();
    for (std::size_t b = 0; b < batch; ++b) {
      Eigen::Map<const Eigen::VectorXd> gb(G.raw() + b * n, ni);
      if (g.needs_grad(q)) {
        detail::ConstMatMap kb(Kv.raw() + b * n * d, ni, di);
        Eigen::Map<Eigen::VectorXd> dq(g.grad_of(q).raw() + b * d, di);
        dq.noalias() += scale * (kb.transpose() * gb);
      }
      if (g.needs_grad(keys)) {
        Eigen::Map<const Eigen::VectorXd> qb(Qv.raw() + b * d, di);
        detail::MatMap dk(g.grad_of(keys).raw() + b * n * d, ni, di);
        dk.noalias() += scale * (gb * qb.transpose());
      }
    }
  });
}

Var attention_context(Var alpha, Var values) {
  const Tensor& Al = alpha.value();
  const Tensor& V = values.value();
  const std::size_t n = Al.cols();
  if (V.rows() != Al.rows() || V.cols() % n != 0) {
    throw DimensionError("attention_context: weights " + dims(Al) + " incompatible with packed values " + dims(V));
  }
  const std::size_t batch = Al.rows();
  const std::size_t d = V.cols() / n;
  const auto ni = static_cast<Eigen::Index>(n);
  const auto di = static_cast<Eigen::Index>(d);
  Tensor out = Tensor::uninitialized(batch, d);
  for (std::size_t b = 0; b < batch; ++b) {
    detail::ConstMatMap vb(V.raw() + b * n * d, ni, di);
    Eigen::Map<const Eigen::VectorXd> ab(Al.raw() + b * n, ni);
    Eigen::Map<Eigen::VectorXd> ob(out.raw() + b * d, di);
    ob.noalias() = vb.transpose() * ab;
  }
  return alpha.graph().record(std::move(out), {alpha, values}, [alpha, values, batch, n, d](Graph& g, const Tensor& G, const Tensor&) {
    const auto ni = static_cast<Eigen::Index>(n);
    const auto di = static_cast<Eigen::Index>(d);
    const Tensor& Av = alpha.value();
    const Tensor& Vv = values.value();
    for (std::size_t b = 0; b < batch; ++b) {
      Eigen::Map<const Eigen::VectorXd> gb(G.raw() + b * d, di);
      if (g.needs_grad(alpha)) {
        detail::ConstMatMap vb(Vv.raw() + b * n * d, ni, di);
        Eigen::Map<Eigen::VectorXd> da(g.grad_of(alpha).raw() + b * n, ni);
        da.noalias() += vb * gb;
      }
      if (g.needs_grad(values)) {
        Eigen::Map<const Eigen::VectorXd> ab(Av.raw() + b * n, ni);
        detail::MatMap dv(g.grad_of(values).raw() + b * n * d, ni, di);
        dv.noalias() += ab * gb.transpose();
      }
    }
  });
}

Var cross_entropy(Var logits, std::span<const std::size_t> targets, std::span<const double> weights) {
  const Tensor& L = logits.value();
  const std::size_t rows = L.rows();
  const std::size_t vocab = L.cols();
  if (targets.size() != rows || weights.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets / " +
                         std::to_string(weights.size()) + " weights for logits " + dims(L));
  }
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  std::vector<double> wts(weights.begin(), weights.end());
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (wts[r] == 0.0) continue;
    if (tgt[r] >= vocab) {
      throw IndexError("cross_entropy: target " + std::to_string(tgt[r]) + " outside vocabulary of " +
                       std::to_string(vocab));
    }
    const double* row = L.raw() + r * vocab;
    const double mx = *std::max_element(row, row + vocab);
    double z = 0.0;
    for (std::size_t c = 0; c < vocab; ++c) z += std::exp(row[c] - mx);
    total += wts[r] * (mx + std::log(z) - row[tgt[r]]);
  }
  return logits.graph().record(
      Tensor::scalar(total), {logits},
      [logits, tgt = std::move(tgt), wts = std::move(wts), rows, vocab](Graph& g, const Tensor& G, const Tensor&) {
        const Tensor& Lv = logits.value();
        Tensor& dL = g.grad_of(logits);
        for (std::size_t r = 0; r < rows; ++r) {
          if (wts[r] == 0.0) continue;
          const double* row = Lv.raw() + r * vocab;
          const double mx = *std::max_element(row, row + vocab);
          double z = 0.0;
          for (std::size_t c = 0; c < vocab; ++c) z += std::exp(row[c] - mx);
          const double coeff = G[0] * wts[r];
          for (std::size_t c = 0; c < vocab; ++c) dL[r * vocab + c] += coeff * std::exp(row[c] - mx) / z;
          dL[r * vocab + tgt[r]] -= coeff;
        }
      });
}

Var cross_entropy(Var logits, std::size_t target) {
  const std::size_t t[1] = {target};
  const double w[1] = {1.0};
  return cross_entropy(logits, t, w);
}

std::vector<double> softmax_values(std::span<const double> x) {
  if (x.empty()) throw DomainError("softmax: empty input");
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) z += (out[i] = std::exp(x[i] - mx));
  for (double& v : out) v /= z;
  return out;
}

std::vector<double> log_softmax_values(std::span<const double> x) {
  if (x.empty()) throw DomainError("log_softmax: empty input");
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double v : x) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
  return out;
}

}  // namespace eem::ad
