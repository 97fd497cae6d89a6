// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lambdanet/tensor.hpp"

namespace lambdanet {

/// Spatial layout of a set of positions: a 1-d sequence or a row-major 2-d grid.
struct Geometry {
  enum class Kind { kSeq, kGrid };

  Kind kind = Kind::kSeq;
  std::vector<std::size_t> dims{1};

  static Geometry seq(std::size_t n);
  static Geometry grid(std::size_t height, std::size_t width);
  /// "seq:N" or "grid:HxW".
  static Geometry parse(std::string_view text);

  std::size_t size() const noexcept;
  std::size_t axes() const noexcept { return dims.size(); }
  std::string str() const;
  /// Per-axis coordinates of a flat position.
  std::vector<std::size_t> coords(std::size_t flat) const;

  bool operator==(const Geometry&) const = default;
};

enum class Boundary { kClamped, kCircular };

Boundary parse_boundary(std::string_view text);
std::string to_string(Boundary b);

/// Local scope: odd window extent per spatial axis.
using Scope = std::vector<std::size_t>;

/// "S" or "SxS".
Scope parse_scope(std::string_view text);
std::string scope_str(const Scope& scope);

/// Everything needed to derive relative position embeddings for a layer.
struct PositionSpec {
  Geometry geometry;
  Boundary boundary = Boundary::kClamped;
  std::optional<Scope> scope;
};

inline constexpr int kOutOfScope = -1;

/// Table mapping each (query n, context m) pair to a relative-position bucket
/// of R, or kOutOfScope.
///
/// Buckets depend only on the displacement m - n, so table[n][m] equals
/// table[t(n)][t(m)] for every translation t that keeps both in range (all t in
/// circular mode). Bucket layouts, per axis of extent N, combined row-major:
///   clamped, no scope:   displacement + (N - 1),          N' = 2N - 1 buckets
///   circular, no scope:  displacement mod N,              N' = N buckets
///   scope s:             displacement + (s - 1) / 2,      N' = s buckets
/// With a scope, pairs whose displacement exceeds (s - 1) / 2 on any axis
/// (measured around the ring in circular mode) are out of scope.
class RelIndexMap {
 public:
  /// Throws ConfigError for even scope extents, scopes larger than 2N - 1
  /// (clamped) or N (circular), or a context geometry that differs from the
  /// query geometry.
  static RelIndexMap build(const Geometry& geometry, const Geometry& context, Boundary boundary,
                           const std::optional<Scope>& scope);
  static RelIndexMap build(const PositionSpec& spec) {
    return build(spec.geometry, spec.geometry, spec.boundary, spec.scope);
  }

  const Geometry& geometry() const noexcept { return geometry_; }
  Boundary boundary() const noexcept { return boundary_; }
  const std::optional<Scope>& scope() const noexcept { return scope_; }

  std::size_t num_queries() const noexcept { return n_; }
  std::size_t num_context() const noexcept { return m_; }
  std::size_t num_buckets() const noexcept { return buckets_; }

  /// Computed directly from the two positions; does not touch the table.
  int bucket(std::size_t n, std::size_t m) const;
  /// Row-major [n, m] buckets. Built on first use and shared between copies,
  /// so the convolution path never pays for the quadratic table.
  std::span<const int> table() const;

  /// Per-axis extent of the tap window used by the convolution path. Each tap
  /// offset along an axis runs from -(w - 1) / 2 to (w - 1) / 2.
  std::vector<std::size_t> window() const;
  /// Bucket for a per-axis displacement inside the window.
  int bucket_for_offset(std::span<const long> displacement) const;

  /// [n, m] table as f64 with kOutOfScope as -1, for golden files.
  Tensor to_tensor() const;

 private:
  Geometry geometry_;
  Boundary boundary_ = Boundary::kClamped;
  std::optional<Scope> scope_;
  std::size_t n_ = 0, m_ = 0, buckets_ = 0;
  std::vector<std::size_t> bucket_extents_;
  struct LazyTable {
    std::once_flag once;
    std::vector<int> data;
  };
  std::shared_ptr<LazyTable> table_ = std::make_shared<LazyTable>();
};

/// E[n][m] = R[bucket(n, m)] (trailing axes of R carried along), zero where
/// out of scope. R is [|r|, k] or [|r|, k, u]; the result is [n, m, k] or
/// [n, m, k, u].
template <class T>
BasicTensor<T> expand_embeddings(const RelIndexMap& map, const BasicTensor<T>& table);

/// Adjoint of expand_embeddings: accumulates dE[n][m] into dR[bucket(n, m)].
Tensor scatter_embedding_grad(const RelIndexMap& map, const Tensor& grad_embeddings);

/// mask[n][m] = 1 iff m <= n.
Tensor build_causal_mask(std::size_t n);

}  // namespace lambdanet
