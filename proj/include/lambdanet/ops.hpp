// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "lambdanet/tensor.hpp"

namespace lambdanet {

/// Softmax along `axis`. Each slice is shifted by its maximum before
/// exponentiation; the normalizer is summed in ascending index order.
template <class T>
BasicTensor<T> softmax(const BasicTensor<T>& t, std::size_t axis);

/// Divides each slice along `axis` by its Euclidean norm. All-zero slices stay
/// zero.
template <class T>
BasicTensor<T> l2_normalize(const BasicTensor<T>& t, std::size_t axis);

// Elementwise arithmetic. `b` must have the same shape as `a` or be a suffix of
// it (broadcast over the leading axes of `a`).
template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor);

/// Sums `t` over all leading axes, leaving the trailing `keep` axes.
template <class T>
BasicTensor<T> sum_leading(const BasicTensor<T>& t, std::size_t keep);

template <class T>
T max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T>
T max_abs(const BasicTensor<T>& a);
template <class T>
bool all_finite(const BasicTensor<T>& a);

}  // namespace lambdanet
