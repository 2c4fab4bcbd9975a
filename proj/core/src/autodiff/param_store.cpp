// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/param_store.hpp"

#include <cmath>

#include "eem/common/error.hpp"
#include "eem/common/rng.hpp"

namespace eem::ad {

std::size_t ParamStore::add(std::string name, Tensor value) {
  if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
  const std::size_t id = params_.size();
  value.set_requires_grad(true);
  Tensor grad(value.shape(), 0.0);
  index_.emplace(name, id);
  params_.push_back(Parameter{std::move(name), std::move(value), std::move(grad)});
  return id;
}

std::size_t ParamStore::add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return add(std::move(name), std::move(t));
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("no parameter named '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

}  // namespace eem::ad
