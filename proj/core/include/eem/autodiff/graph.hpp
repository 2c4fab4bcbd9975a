// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eem/autodiff/param_store.hpp"
#include "eem/autodiff/tensor.hpp"

namespace eem::ad {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order and backward is a single reverse sweep. Parameters are
/// bound by reference (no copy); bind each at most once per graph so that
/// multiple consumers sum into one adjoint.
class Graph {
 public:
  /// Local gradient rule: given the adjoint and value of this node,
  /// accumulate into the adjoints of its parents via Graph::grad_of.
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad, const Tensor& out_value)>;

  explicit Graph(bool record_gradients = true) : record_(record_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }

  Var constant(Tensor value);
  /// Free input; gradients are kept on the node when requires_grad is set.
  Var input(Tensor value, bool requires_grad);
  /// Parameter leaf. Repeated binds of the same parameter return one node.
  Var param(Parameter& p);

  /// Appends an op node. `fn` is dropped when no parent needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(Tensor value, const std::vector<Var>& parents, BackwardFn fn);

  const Tensor& value(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id_].needs_grad; }

  /// Adjoint buffer of a node, zero-initialized on first access.
  Tensor& grad_of(Var v);
  /// Adjoint after backward, or nullptr if nothing flowed into the node.
  const Tensor* grad(Var v) const;

  /// Reverse sweep from a 1 x 1 loss node. Throws ContractError otherwise.
  void backward(Var loss);

  /// Parameter adjoints gathered after backward, in first-bind order.
  std::vector<std::pair<Parameter*, const Tensor*>> parameter_grads() const;
  /// Adds every parameter adjoint into Parameter::grad.
  void accumulate_parameter_grads() const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor own;
    const Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool needs_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  Var push(Node node);

  bool record_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
  std::vector<std::size_t> param_nodes_;
};

}  // namespace eem::ad
