// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "lambdanet/error.hpp"
#include "lambdanet/memory.hpp"

namespace lambdanet {

using Shape = std::vector<std::size_t>;

std::size_t num_elements(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

/// Element type tag used by serialization.
enum class DType : std::uint8_t { kF64 = 0, kF32 = 1 };

template <class T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<double>() { return DType::kF64; }
template <>
constexpr DType dtype_of<float>() { return DType::kF32; }

/// Dense row-major array. Rank 0 is a scalar holding one element. All extents
/// are at least one. Reshape and transpose copy; there are no strided views.
template <class T>
class BasicTensor {
 public:
  using value_type = T;
  using Buffer = std::vector<T, memory::TrackingAllocator<T>>;

  BasicTensor() : data_(1, T{0}) {}
  explicit BasicTensor(Shape shape);
  BasicTensor(Shape shape, std::span<const T> values);
  BasicTensor(Shape shape, std::initializer_list<T> values);

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }
  static BasicTensor full(Shape shape, T value);

  std::size_t rank() const noexcept { return shape_.size(); }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return {data_.data(), data_.size()}; }
  std::span<const T> data() const noexcept { return {data_.data(), data_.size()}; }
  T* raw() noexcept { return data_.data(); }
  const T* raw() const noexcept { return data_.data(); }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  /// Bounds-checked multi-index access.
  T& at(std::initializer_list<std::size_t> index);
  const T& at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::span<const std::size_t> index) const;

  /// Row-major strides in elements.
  std::vector<std::size_t> strides() const;

  BasicTensor reshape(Shape shape) const;
  /// Output axis i is input axis perm[i].
  BasicTensor transpose(std::span<const std::size_t> perm) const;
  BasicTensor transpose(std::initializer_list<std::size_t> perm) const {
    return transpose(std::span<const std::size_t>(perm.begin(), perm.size()));
  }

  template <class U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const BasicTensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  Buffer data_;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

extern template class BasicTensor<double>;
extern template class BasicTensor<float>;

}  // namespace lambdanet
