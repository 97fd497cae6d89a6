// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/ops.hpp"

#include <algorithm>
#include <cmath>

namespace lambdanet {
namespace {

// Calls fn(base, stride, length) for every 1-d slice along `axis`.
template <class T, class Fn>
void for_each_slice(const BasicTensor<T>& t, std::size_t axis, Fn&& fn) {
  if (axis >= t.rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(t.rank()));
  }
  const auto& shape = t.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) fn(o * len * inner + i, inner, len);
  }
}

enum class Broadcast { kSame, kSuffix };

Broadcast check_broadcast(const Shape& a, const Shape& b) {
  if (a == b) return Broadcast::kSame;
  if (b.size() <= a.size() && std::equal(b.begin(), b.end(), a.end() - static_cast<long>(b.size()))) {
    return Broadcast::kSuffix;
  }
  throw ShapeError("shapes " + to_string(a) + " and " + to_string(b) + " do not broadcast");
}

template <class T, class Op>
BasicTensor<T> binary(const BasicTensor<T>& a, const BasicTensor<T>& b, Op op) {
  check_broadcast(a.shape(), b.shape());
  BasicTensor<T> out(a.shape());
  const std::size_t period = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i % period]);
  return out;
}

}  // namespace

template <class T>
BasicTensor<T> softmax(const BasicTensor<T>& t, std::size_t axis) {
  BasicTensor<T> out(t.shape());
  for_each_slice(t, axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    T mx = t[base];
    for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, t[base + j * stride]);
    T sum{0};
    for (std::size_t j = 0; j < len; ++j) {
      const T e = std::exp(t[base + j * stride] - mx);
      out[base + j * stride] = e;
      sum += e;
    }
    for (std::size_t j = 0; j < len; ++j) out[base + j * stride] /= sum;
  });
  return out;
}

template <class T>
BasicTensor<T> l2_normalize(const BasicTensor<T>& t, std::size_t axis) {
  BasicTensor<T> out(t.shape());
  for_each_slice(t, axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    T sq{0};
    for (std::size_t j = 0; j < len; ++j) sq += t[base + j * stride] * t[base + j * stride];
    if (sq == T{0}) return;  // zero slice stays zero
    const T norm = std::sqrt(sq);
    for (std::size_t j = 0; j < len; ++j) out[base + j * stride] = t[base + j * stride] / norm;
  });
  return out;
}

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary(a, b, [](T x, T y) { return x + y; });
}

template <class T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary(a, b, [](T x, T y) { return x - y; });
}

template <class T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary(a, b, [](T x, T y) { return x * y; });
}

template <class T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  return out;
}

template <class T>
BasicTensor<T> sum_leading(const BasicTensor<T>& t, std::size_t keep) {
  if (keep > t.rank()) throw ShapeError("sum_leading keeps more axes than the tensor has");
  Shape tail(t.shape().end() - static_cast<long>(keep), t.shape().end());
  BasicTensor<T> out(tail);
  const std::size_t period = out.size();
  for (std::size_t i = 0; i < t.size(); ++i) out[i % period] += t[i];
  return out;
}

template <class T>
T max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff of " + to_string(a.shape()) + " and " + to_string(b.shape()));
  }
  T worst{0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T d = std::abs(a[i] - b[i]);
    if (!(d <= worst)) worst = d;  // propagates NaN
  }
  return worst;
}

template <class T>
T max_abs(const BasicTensor<T>& a) {
  T worst{0};
  for (auto x : a.data()) worst = std::max(worst, std::abs(x));
  return worst;
}

template <class T>
bool all_finite(const BasicTensor<T>& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](T x) { return std::isfinite(x); });
}

#define LAMBDANET_INSTANTIATE(T)                                                     \
  template BasicTensor<T> softmax(const BasicTensor<T>&, std::size_t);               \
  template BasicTensor<T> l2_normalize(const BasicTensor<T>&, std::size_t);          \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                           \
  template BasicTensor<T> sum_leading(const BasicTensor<T>&, std::size_t);           \
  template T max_abs_diff(const BasicTensor<T>&, const BasicTensor<T>&);             \
  template T max_abs(const BasicTensor<T>&);                                         \
  template bool all_finite(const BasicTensor<T>&);

LAMBDANET_INSTANTIATE(double)
LAMBDANET_INSTANTIATE(float)

#undef LAMBDANET_INSTANTIATE

}  // namespace lambdanet
