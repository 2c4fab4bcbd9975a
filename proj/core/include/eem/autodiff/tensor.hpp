// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eem::ad {

using Shape = std::vector<std::size_t>;

/// Allocator giving every tensor buffer the same 64-byte alignment. Vector
/// kernels peel differently depending on the start address, so a fixed
/// alignment is what makes results bit-reproducible across runs.
/// 64-byte aligned blocks, recycled through a per-thread cache of freed
/// blocks keyed by size. A training step allocates and frees the same set
/// of activation shapes over and over; reusing them avoids returning the
/// memory to the system and faulting it back in on the next step.
void* buffer_acquire(std::size_t bytes);
void buffer_release(void* p, std::size_t bytes) noexcept;

template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(buffer_acquire(n * sizeof(T))); }
  void deallocate(T* p, std::size_t n) noexcept { buffer_release(p, n * sizeof(T)); }

  // Default-initialize, so resize() leaves doubles unwritten.
  template <typename U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <typename U, typename... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

std::string shape_string(const Shape& shape);

/// Dense row-major tensor of doubles, rank 1 or 2.
///
/// Every kernel in the library treats a tensor as a matrix: a rank-1 tensor
/// of length n is a 1 x n row. Batched activations are B x d with one example
/// per row.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// rows x cols with unspecified contents; callers must write every entry.
  static Tensor uninitialized(std::size_t rows, std::size_t cols);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor scalar(double value) { return matrix(1, 1, value); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : (shape_.empty() ? 0 : 1); }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  /// Single value of a 1 x 1 tensor.
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool all_finite() const;
  void fill(double v);
  bool same_shape(const Tensor& other) const { return rows() == other.rows() && cols() == other.cols(); }

  /// Reinterprets the same row-major buffer with a new shape.
  Tensor reshaped(Shape shape) const;

  std::vector<double> row(std::size_t r) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Buffer data_;
  bool requires_grad_ = false;
};

}  // namespace eem::ad
