// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

#include "lambdanet/variants.hpp"

namespace lambdanet::reference {

// Slow scalar-loop implementations that share no code with the contraction
// engine or the layer kernels. Used as oracles by the verify suites and the
// tests. Reference precision only.

/// Builds each query's lambda explicitly,
///   lambda_n = sum_m sum_u (normalized key[m] * [content] + e[n][m] * [position]) v[m]^T,
/// then y_n = lambda_n^T q_n per head. Covers every variant: per-query key
/// normalization for masks, per-head keys, values and embeddings for
/// multihead, and the u axis for intra-depth. Embeddings are looked up bucket
/// by bucket from the relative index map, so the conv implementations are
/// checked against the same sums.
Tensor layer_forward(Variant variant, const Tensor& x, const Tensor& context, const LambdaParams& params,
                     const LambdaConfig& config, const MaskSpec* mask = nullptr);

/// Direct sum over window taps: out[b, n, k, v] = sum over m in the window
/// of R[bucket(n, m), k] * V[b, m, v].
Tensor local_position_lambdas(const RelIndexMap& map, const Tensor& table, const Tensor& values);

/// Naive einsum: one odometer over every label, each output element
/// accumulated by plain nested loops. Shares no parsing or kernels with
/// contract().
Tensor einsum(std::string_view spec, const std::vector<const Tensor*>& operands);

}  // namespace lambdanet::reference
