// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "lambdanet/lambda_layer.hpp"

namespace lambdanet {

enum class Variant { kGlobal, kMasked, kMultihead, kIntraDepth, kContentOnly };

/// "global", "masked", "multihead", "intra-depth", "content-only".
Variant parse_variant(std::string_view text);
std::string to_string(Variant v);

/// Binary [n, m] mask shared across the batch. mask[n][m] = 1 lets query n
/// see context position m.
struct MaskSpec {
  Tensor mask;

  static MaskSpec causal(std::size_t n) { return {build_causal_mask(n)}; }
  /// Throws ConfigError unless the mask is [n, m], binary, and every row has a
  /// one.
  void validate(std::size_t n, std::size_t m) const;
};

/// Masked multi-query layer. Keys are normalized per query over its visible
/// context, giving per-query content lambdas [b, n, k, v]; embeddings are
/// masked before the position contraction. No [b, h, n, m] or [b, n, m, k]
/// array is materialized.
template <class T>
BasicTensor<T> masked_lambda_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                     const BasicLambdaParams<T>& params, const LambdaConfig& config,
                                     const MaskSpec& mask);

/// Per-query masked key normalization fused with the content contraction:
/// lambda_c[b, n, k, v] = sum_m normalize_{m : mask[n][m]}(K[b, :, k])[m] * V[b, m, v].
template <class T>
BasicTensor<T> masked_content_lambdas(const BasicTensor<T>& keys, const BasicTensor<T>& values,
                                      const Tensor& mask, KeyNorm mode);

/// Multi-head parameters: w_q [d, h*k], w_k [d, h*k], w_v [d, h*v],
/// r [h, |r|, k], v hook [h*v]. Same distributions as init_params.
LambdaParams init_multihead_params(const LambdaConfig& config, std::uint64_t seed);

/// Multi-head layer: every head has its own keys, values and embeddings.
/// Einsum position path only.
template <class T>
BasicTensor<T> multihead_lambda_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                        const BasicLambdaParams<T>& params, const LambdaConfig& config);

/// Multi-query layer with intra-depth u >= 1 (keys [b, m, k, u], values
/// [b, m, v, u], R [|r|, k, u] when u > 1).
template <class T>
BasicTensor<T> intra_depth_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                   const BasicLambdaParams<T>& params, const LambdaConfig& config);

/// Multi-query layer with the position lambdas forced to zero. Equivalent to
/// linear attention with softmax-over-m key features and identity query
/// features.
template <class T>
BasicTensor<T> content_only_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                    const BasicLambdaParams<T>& params, const LambdaConfig& config);

/// Parameters in the layout the variant expects.
LambdaParams init_variant_params(Variant variant, const LambdaConfig& config, std::uint64_t seed);

/// Forward pass of any variant. `mask` is required for kMasked and ignored
/// otherwise.
template <class T>
BasicTensor<T> variant_forward(Variant variant, const BasicTensor<T>& x, const BasicTensor<T>& context,
                               const BasicLambdaParams<T>& params, const LambdaConfig& config,
                               const MaskSpec* mask = nullptr);

/// Content lambda [b, k, k] = diag(weights[b]) for weights [b, k]. Applied to
/// queries it rescales each channel (channel attention).
Tensor diagonal_lambda(const Tensor& weights);

/// Position lambdas [b, n, k, k] = weights[b, n] * I for weights [b, n].
/// Applied to queries it rescales each position (spatial attention).
Tensor scalar_lambdas(const Tensor& weights, std::size_t k);

}  // namespace lambdanet
