// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lambdanet {

enum class OpKind {
  kLambda,
  kLambdaConv,
  kMultiheadLambda,
  kIntraDepthLambda,
  kMaskedLambda,
  kContentOnlyLambda,
  kLambdaSharedEmbeddings,
  kAttention,
  kRelativeAttention,
  kLinearAttention,
  kAxialAttention,
  kLocalAttention,
};

OpKind parse_op_kind(std::string_view text);
std::string to_string(OpKind op);
std::vector<OpKind> all_op_kinds();

/// Dimensions for the closed-form models. Unset dims that an op needs raise
/// ConfigError. Legend: b batch, n queries, m context, r local scope size,
/// k query/key depth, v value depth, d output channels, h heads (or queries
/// per lambda), u intra-depth, l layers, height/width grid extents.
struct DimSet {
  std::optional<std::uint64_t> b, n, m, r, k, v, d, h, u, l, height, width;
  std::uint64_t bytes_per_element = 4;
  /// Count the per-example lambdas and attention outputs in space_cost.
  bool include_activations = false;
};

struct ComplexityReport {
  OpKind op = OpKind::kLambda;
  std::uint64_t multiplies = 0;
  std::uint64_t bytes = 0;
  std::map<std::string, std::uint64_t> terms;

  /// Multiply-adds counted as two operations.
  std::uint64_t flops() const { return 2 * multiplies; }
};

/// Exact multiply count of this library's kernel for `op`, split by term.
/// Projections are not included.
ComplexityReport time_cost(OpKind op, const DimSet& dims);

/// Bytes held by the op's quadratic or windowed intermediates (attention maps
/// or position embeddings) over l layers, split by term.
ComplexityReport space_cost(OpKind op, const DimSet& dims);

/// Layers per stage and the stage's square spatial side, e.g. 3 layers at
/// 56x56.
struct Stage {
  std::uint64_t layers = 0;
  std::uint64_t side = 0;
};

struct StageSpec {
  std::vector<Stage> stages;

  /// "3x56,4x28,6x14,3x7". Zero layer counts or sides raise ConfigError.
  static StageSpec parse(std::string_view text);
  std::string str() const;
};

/// Residual-network stage layout used by the memory report defaults.
StageSpec default_stages();

struct MemoryOptions {
  std::uint64_t b = 128;
  std::uint64_t h = 8;
  std::uint64_t k = 16;
  std::uint64_t bytes_per_element = 4;
  /// Window side for the local attention and lambda convolution rows.
  std::uint64_t scope = 7;
};

struct MemoryRow {
  std::string name;
  OpKind op = OpKind::kLambda;
  std::uint64_t k = 0;
  std::uint64_t bytes = 0;
  std::vector<std::uint64_t> stage_bytes;

  double gib() const { return static_cast<double>(bytes) / static_cast<double>(1ULL << 30); }
  double gb() const { return static_cast<double>(bytes) / 1e9; }
};

struct MemoryReport {
  StageSpec stages;
  MemoryOptions options;
  std::vector<MemoryRow> rows;

  const MemoryRow& row(std::string_view name) const;
};

/// One row per layer family over every stage. Rows: global attention, axial
/// attention, local attention, lambda layer at k and k/2, lambda layer with
/// embeddings shared across layers of equal resolution, lambda convolution.
MemoryReport memory_report(const StageSpec& stages, const MemoryOptions& options);

}  // namespace lambdanet
