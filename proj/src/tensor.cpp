// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace lambdanet {

std::size_t num_elements(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (auto e : shape) {
    if (e == 0) throw ShapeError("zero extent in shape " + to_string(shape));
  }
}

}  // namespace

template <class T>
BasicTensor<T>::BasicTensor(Shape shape) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(num_elements(shape_), T{0});
}

template <class T>
BasicTensor<T>::BasicTensor(Shape shape, std::span<const T> values) : shape_(std::move(shape)) {
  check_extents(shape_);
  if (values.size() != num_elements(shape_)) {
    throw ShapeError("buffer of " + std::to_string(values.size()) + " elements for shape " +
                     to_string(shape_));
  }
  data_.assign(values.begin(), values.end());
}

template <class T>
BasicTensor<T>::BasicTensor(Shape shape, std::initializer_list<T> values)
    : BasicTensor(std::move(shape), std::span<const T>(values.begin(), values.size())) {}

template <class T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value) {
  BasicTensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

template <class T>
std::size_t BasicTensor<T>::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(shape_.size()));
  }
  return shape_[axis];
}

template <class T>
std::vector<std::size_t> BasicTensor<T>::strides() const {
  std::vector<std::size_t> s(shape_.size(), 1);
  for (std::size_t i = shape_.size(); i-- > 1;) s[i - 1] = s[i] * shape_[i];
  return s;
}

template <class T>
std::size_t BasicTensor<T>::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index of rank " + std::to_string(index.size()) + " for tensor of rank " +
                     std::to_string(shape_.size()));
  }
  std::size_t off = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) throw ShapeError("index out of range on axis " + std::to_string(i));
    off = off * shape_[i] + index[i];
  }
  return off;
}

template <class T>
T& BasicTensor<T>::at(std::initializer_list<std::size_t> index) {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

template <class T>
const T& BasicTensor<T>::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

template <class T>
BasicTensor<T> BasicTensor<T>::reshape(Shape shape) const {
  if (num_elements(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return BasicTensor(std::move(shape), data());
}

template <class T>
BasicTensor<T> BasicTensor<T>::transpose(std::span<const std::size_t> perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw ShapeError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (perm[i] >= r || seen[perm[i]]) throw ShapeError("invalid permutation");
    seen[perm[i]] = true;
    out_shape[i] = shape_[perm[i]];
  }
  BasicTensor out(out_shape);
  const auto in_strides = strides();
  std::vector<std::size_t> step(r);
  for (std::size_t i = 0; i < r; ++i) step[i] = in_strides[perm[i]];

  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out.data_[flat] = data_[src];
    for (std::size_t ax = r; ax-- > 0;) {
      if (++idx[ax] < out_shape[ax]) {
        src += step[ax];
        break;
      }
      src -= step[ax] * (out_shape[ax] - 1);
      idx[ax] = 0;
    }
  }
  return out;
}

template class BasicTensor<double>;
template class BasicTensor<float>;

}  // namespace lambdanet
