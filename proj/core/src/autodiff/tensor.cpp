// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <new>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "eem/common/error.hpp"

namespace eem::ad {
namespace {

std::size_t checked_product(const Shape& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw DimensionError("tensor rank must be 1 or 2, got shape " + shape_string(shape));
  }
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
    n *= d;
  }
  return n;
}

constexpr std::align_val_t kBufferAlign{64};
constexpr std::size_t kCacheLimitBytes = std::size_t{512} << 20;

struct BufferCache {
  std::unordered_map<std::size_t, std::vector<void*>> free;
  std::size_t bytes = 0;

  ~BufferCache();
};

// Stays readable after the cache is destroyed during thread exit, so late
// releases fall back to the system allocator.
thread_local bool cache_alive = false;

BufferCache::~BufferCache() {
  cache_alive = false;
  for (auto& [size, blocks] : free) {
    for (void* p : blocks) ::operator delete(p, kBufferAlign);
  }
}

BufferCache& cache() {
  thread_local BufferCache c;
  cache_alive = true;
  return c;
}

}  // namespace

void* buffer_acquire(std::size_t bytes) {
  if (bytes == 0) bytes = 1;
  auto& c = cache();
  if (auto it = c.free.find(bytes); it != c.free.end() && !it->second.empty()) {
    void* p = it->second.back();
    it->second.pop_back();
    c.bytes -= bytes;
    return p;
  }
  return ::operator new(bytes, kBufferAlign);
}

void buffer_release(void* p, std::size_t bytes) noexcept {
  if (p == nullptr) return;
  if (bytes == 0) bytes = 1;
  if (cache_alive) {
    auto& c = cache();
    if (c.bytes + bytes <= kCacheLimitBytes) {
      try {
        c.free[bytes].push_back(p);
        c.bytes += bytes;
        return;
      } catch (...) {
        // fall through to the system allocator
      }
    }
  }
  ::operator delete(p, kBufferAlign);
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  data_.assign(checked_product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (checked_product(shape_) != data_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string(shape_));
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) { return Tensor({rows, cols}, fill); }

Tensor Tensor::uninitialized(std::size_t rows, std::size_t cols) {
  Tensor t;
  t.shape_ = {rows, cols};
  t.data_.resize(checked_product(t.shape_));
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

double Tensor::item() const {
  if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  if (checked_product(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  out.requires_grad_ = requires_grad_;
  return out;
}

std::vector<double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return {data_.begin() + static_cast<std::ptrdiff_t>(r * c), data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * c)};
}

}  // namespace eem::ad
