// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lambdanet/lambda_layer.hpp"

namespace lambdanet::detail {

// Multi-query forward for any u >= 1. The public entry points check the
// variant-specific preconditions and delegate here.
template <class T>
BasicTensor<T> multi_query_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                   const BasicLambdaParams<T>& params, const LambdaConfig& config);

// Checks x [b, n, d_in] and context [b, m, d_in] against the config. When the
// position term is used, n and m must both equal the geometry size.
void check_inputs(const Shape& x, const Shape& context, const LambdaConfig& config);

// Normalized key weights w[m] of column (b, k) of keys [b, m, k], restricted
// to the context positions where row[m] != 0. Hidden positions get zero.
template <class T>
void masked_key_weights(const BasicTensor<T>& keys, std::size_t b, std::size_t k, const double* row,
                        KeyNorm mode, std::vector<T>& w) {
  const std::size_t M = keys.extent(1), K = keys.extent(2);
  auto key = [&](std::size_t m) { return keys[(b * M + m) * K + k]; };
  w.assign(M, T{0});
  if (mode == KeyNorm::kSoftmax) {
    bool first = true;
    T mx{0};
    for (std::size_t m = 0; m < M; ++m) {
      if (row[m] == 0.0) continue;
      mx = first ? key(m) : std::max(mx, key(m));
      first = false;
    }
    T sum{0};
    for (std::size_t m = 0; m < M; ++m) {
      if (row[m] == 0.0) continue;
      w[m] = std::exp(key(m) - mx);
      sum += w[m];
    }
    for (std::size_t m = 0; m < M; ++m) {
      if (row[m] != 0.0) w[m] /= sum;
    }
  } else if (mode == KeyNorm::kL2) {
    T sq{0};
    for (std::size_t m = 0; m < M; ++m) {
      if (row[m] != 0.0) sq += key(m) * key(m);
    }
    if (sq == T{0}) return;
    const T norm = std::sqrt(sq);
    for (std::size_t m = 0; m < M; ++m) {
      if (row[m] != 0.0) w[m] = key(m) / norm;
    }
  } else {
    for (std::size_t m = 0; m < M; ++m) {
      if (row[m] != 0.0) w[m] = key(m);
    }
  }
}

// Per-head embeddings [h, n, m, k] from r [h, |r|, k].
template <class T>
BasicTensor<T> multihead_embeddings(const RelIndexMap& map, const BasicTensor<T>& r);

}  // namespace lambdanet::detail
