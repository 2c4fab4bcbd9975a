// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/graph.hpp"

#include "eem/common/error.hpp"

namespace eem::ad {

const Tensor& Var::value() const { return graph_->value(*this); }

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value) {
  Node n;
  n.own = std::move(value);
  return push(std::move(n));
}

Var Graph::input(Tensor value, bool requires_grad) {
  Node n;
  n.own = std::move(value);
  n.needs_grad = record_ && requires_grad;
  return push(std::move(n));
}

Var Graph::param(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.needs_grad = record_;
  Var v = push(std::move(n));
  bound_.emplace(&p, v.id_);
  param_nodes_.push_back(v.id_);
  return v;
}

Var Graph::record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
  Node n;
  n.own = std::move(value);
  if (record_) {
    for (const Var& p : parents) n.needs_grad = n.needs_grad || nodes_[p.id_].needs_grad;
    if (n.needs_grad) n.backward = std::move(fn);
  }
  return push(std::move(n));
}

Var Graph::record(Tensor value, const std::vector<Var>& parents, BackwardFn fn) {
  Node n;
  n.own = std::move(value);
  if (record_) {
    for (const Var& p : parents) n.needs_grad = n.needs_grad || nodes_[p.id_].needs_grad;
    if (n.needs_grad) n.backward = std::move(fn);
  }
  return push(std::move(n));
}

const Tensor& Graph::value(Var v) const {
  const Node& n = nodes_[v.id_];
  return n.external ? *n.external : n.own;
}

Tensor& Graph::grad_of(Var v) {
  Node& n = nodes_[v.id_];
  if (!n.has_grad) {
    n.grad = Tensor(value(v).shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor* Graph::grad(Var v) const {
  const Node& n = nodes_[v.id_];
  return n.has_grad ? &n.grad : nullptr;
}

void Graph::backward(Var loss) {
  if (loss.graph_ != this) throw ContractError("backward: loss belongs to a different graph");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw ContractError("backward: loss must be scalar, got shape " + shape_string(lv.shape()));
  if (!record_) throw ContractError("backward: graph was built without gradient recording");
  grad_of(loss)[0] += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // The closure may allocate parent adjoints; deque keeps n.grad stable.
    n.backward(*this, n.grad, n.own);
  }
}

std::vector<std::pair<Parameter*, const Tensor*>> Graph::parameter_grads() const {
  std::vector<std::pair<Parameter*, const Tensor*>> out;
  out.reserve(param_nodes_.size());
  for (std::size_t id : param_nodes_) {
    const Node& n = nodes_[id];
    if (n.has_grad) out.emplace_back(n.param, &n.grad);
  }
  return out;
}

void Graph::accumulate_parameter_grads() const {
  for (auto [p, g] : parameter_grads()) {
    auto dst = p->grad.data();
    auto src = g->data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace eem::ad
