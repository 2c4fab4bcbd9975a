// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "eem/autodiff/tensor.hpp"

namespace eem {
class Rng;
}

namespace eem::ad {

/// A named trainable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Ordered collection of uniquely named parameters.
///
/// Registration order is part of the contract: initialization draws,
/// checkpoint layout and finite-difference sweeps all follow it.
class ParamStore {
 public:
  /// Registers a tensor under `name`; throws ContractError on duplicates.
  std::size_t add(std::string name, Tensor value);

  /// Registers a tensor filled uniformly in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  std::size_t add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng);

  std::size_t size() const { return params_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& get(const std::string& name) { return params_[index_of(name)]; }
  const Parameter& get(const std::string& name) const { return params_[index_of(name)]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace eem::ad
