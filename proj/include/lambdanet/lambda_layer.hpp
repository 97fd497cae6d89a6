// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "lambdanet/relpos.hpp"
#include "lambdanet/tensor.hpp"

namespace lambdanet {

// Shape legend used throughout: b batch, n queries, m context positions,
// k query/key depth, v value depth, h queries per lambda, u intra-depth,
// r relative-position buckets, d channels.

/// Normalization applied to the keys along the context axis m.
enum class KeyNorm { kSoftmax, kL2, kNone };

/// How position lambdas are computed.
enum class PositionImpl { kEinsum, kConv, kDepthwise };

/// Which lambda terms contribute to the output.
enum class Interactions { kBoth, kContentOnly, kPositionOnly };

/// Key normalization axes when u > 1: jointly over (m, u), or over m for each
/// intra-depth slice.
enum class IntraDepthNorm { kJoint, kPerDepth };

KeyNorm parse_key_norm(std::string_view text);
PositionImpl parse_position_impl(std::string_view text);
Interactions parse_interactions(std::string_view text);
IntraDepthNorm parse_intra_depth_norm(std::string_view text);
std::string to_string(KeyNorm v);
std::string to_string(PositionImpl v);
std::string to_string(Interactions v);
std::string to_string(IntraDepthNorm v);

struct LambdaConfig {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::size_t k = 16;
  std::size_t h = 4;
  std::size_t u = 1;
  /// Geometry of the queries; the context shares it.
  PositionSpec position;
  KeyNorm key_norm = KeyNorm::kSoftmax;
  IntraDepthNorm intra_depth_norm = IntraDepthNorm::kJoint;
  /// Per-channel scale/shift on queries and values, standing in for batch
  /// normalization. Applied to queries before the head split.
  bool qv_hook = false;
  PositionImpl impl = PositionImpl::kEinsum;
  Interactions interactions = Interactions::kBoth;

  /// Value depth d_out / h.
  std::size_t v() const noexcept { return h ? d_out / h : 0; }
  bool uses_content() const noexcept { return interactions != Interactions::kPositionOnly; }
  bool uses_position() const noexcept { return interactions != Interactions::kContentOnly; }

  /// Throws ConfigError on zero extents or when h does not divide d_out.
  void validate() const;
};

/// Projection weights, relative-position table and hook vectors.
///
/// Multi-query layout: w_q [d_in, h*k], w_k [d_in, k*u], w_v [d_in, v*u],
/// r [|r|, k] (or [|r|, k, u]), q hook [h*k], v hook [v*u].
/// Multi-head layout: w_k [d_in, h*k], w_v [d_in, h*v], r [h, |r|, k],
/// v hook [h*v].
template <class T>
struct BasicLambdaParams {
  BasicTensor<T> w_q, w_k, w_v, r;
  BasicTensor<T> q_scale, q_shift, v_scale, v_shift;

  template <class U>
  BasicLambdaParams<U> cast() const {
    return {w_q.template cast<U>(),     w_k.template cast<U>(),     w_v.template cast<U>(),
            r.template cast<U>(),       q_scale.template cast<U>(), q_shift.template cast<U>(),
            v_scale.template cast<U>(), v_shift.template cast<U>()};
  }

  /// Elements in the projections and the embedding table (hook excluded).
  std::size_t parameter_count() const { return w_q.size() + w_k.size() + w_v.size() + r.size(); }
};

using LambdaParams = BasicLambdaParams<double>;

/// Multi-query parameters. Deterministic in `seed`:
/// w_q ~ N(0, 1/(k d_in)), w_k and w_v ~ N(0, 1/d_in) (variances), r ~ N(0, 1),
/// hook scale 1 and shift 0. Each tensor draws from its own substream.
LambdaParams init_params(const LambdaConfig& config, std::uint64_t seed);

/// Closed-form multi-query parameter count d(hk + ku + vu) + |r| k u.
std::size_t expected_parameter_count(const LambdaConfig& config);

/// Number of relative-position buckets for the config's geometry and scope.
std::size_t num_buckets(const LambdaConfig& config);

template <class T>
struct QueryKeyValue {
  BasicTensor<T> queries;  // [b, h, n, k]
  BasicTensor<T> keys;     // [b, m, k] or [b, m, k, u]
  BasicTensor<T> values;   // [b, m, v] or [b, m, v, u]
};

/// X [b, n, d_in] and context C [b, m, d_in] to queries, keys and values.
/// The hook (when enabled) scales and shifts queries and values; keys are not
/// hooked.
template <class T>
QueryKeyValue<T> project_qkv(const BasicTensor<T>& x, const BasicTensor<T>& context,
                             const BasicLambdaParams<T>& params, const LambdaConfig& config);

/// Normalizes keys [b, m, k] along m for each (b, k). For [b, m, k, u] the
/// axes follow `intra`.
template <class T>
BasicTensor<T> normalize_keys(const BasicTensor<T>& keys, KeyNorm mode,
                              IntraDepthNorm intra = IntraDepthNorm::kJoint);

/// bmk,bmv->bkv
template <class T>
BasicTensor<T> content_lambda(const BasicTensor<T>& normalized_keys, const BasicTensor<T>& values);

/// nmk,bmv->bnkv
template <class T>
BasicTensor<T> position_lambdas_einsum(const BasicTensor<T>& embeddings, const BasicTensor<T>& values);

/// Applies the shared lambda to every query head and concatenates heads along
/// channels: y[b, n, h*v] from queries [b, h, n, k], content lambda [b, k, v]
/// and position lambdas [b, n, k, v]. Either lambda may be null, in which case
/// its term is skipped.
template <class T>
BasicTensor<T> apply_lambdas(const BasicTensor<T>& queries, const BasicTensor<T>* content,
                             const BasicTensor<T>* position);

/// Lambda computation from already projected tensors: queries [b, h, n, k],
/// raw keys [b, m, k], embeddings [n, m, k] (null for content only) and values
/// [b, m, v].
template <class T>
BasicTensor<T> lambda_core(const BasicTensor<T>& queries, const BasicTensor<T>& keys,
                           const BasicTensor<T>* embeddings, const BasicTensor<T>& values,
                           KeyNorm mode);

/// Position lambdas [b, n, k, v] for the configured implementation.
template <class T>
BasicTensor<T> position_lambdas(const RelIndexMap& map, const BasicTensor<T>& table,
                                const BasicTensor<T>& values, PositionImpl impl);

/// Full multi-query forward pass (u must be 1). Returns [b, n, d_out].
template <class T>
BasicTensor<T> lambda_layer_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                    const BasicLambdaParams<T>& params, const LambdaConfig& config);

}  // namespace lambdanet
