// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lambdanet/tensor.hpp"

namespace lambdanet {

/// Parsed explicit-mode contraction string such as "bmk,bmv->bkv".
///
/// Each operand names its axes with single-letter labels. Labels absent from
/// the output are summed. Within an operand a label may appear only once.
struct ContractionSpec {
  std::vector<std::string> inputs;
  std::string output;

  static ContractionSpec parse(std::string_view text);
  std::string str() const;

  /// Summed labels in order of first appearance across the inputs. This is
  /// also the reduction order: row-major over these labels, last innermost.
  std::string summed_labels() const;
};

enum class ContractPath {
  kAuto,     // use a hand-written kernel when one exists for the spec
  kGeneric,  // always use the strided loop-nest engine
};

/// General tensor contraction with einsum semantics.
///
/// The result is the broadcast product of all operands summed over every label
/// absent from the output. Each output element is accumulated in a single
/// accumulator starting at zero, visiting the summed labels in row-major order
/// (ascending index, last summed label innermost). Hand-written kernels keep
/// this order, so both paths are bit-identical.
///
/// Throws ShapeError when a label's extents disagree or an operand's rank does
/// not match its labels, SpecError for malformed strings.
template <class T>
BasicTensor<T> contract(std::string_view spec, std::span<const BasicTensor<T>* const> operands,
                        ContractPath path = ContractPath::kAuto);

template <class T>
BasicTensor<T> contract(std::string_view spec, const BasicTensor<T>& a,
                        ContractPath path = ContractPath::kAuto) {
  const BasicTensor<T>* ops[] = {&a};
  return contract<T>(spec, ops, path);
}

template <class T>
BasicTensor<T> contract(std::string_view spec, const BasicTensor<T>& a, const BasicTensor<T>& b,
                        ContractPath path = ContractPath::kAuto) {
  const BasicTensor<T>* ops[] = {&a, &b};
  return contract<T>(spec, ops, path);
}

template <class T>
BasicTensor<T> contract(std::string_view spec, const BasicTensor<T>& a, const BasicTensor<T>& b,
                        const BasicTensor<T>& c, ContractPath path = ContractPath::kAuto) {
  const BasicTensor<T>* ops[] = {&a, &b, &c};
  return contract<T>(spec, ops, path);
}

/// Scalar multiplies a contraction performs: (operands - 1) times the product
/// of every label extent. This is what the instrumented counter records.
std::uint64_t contraction_multiplies(const ContractionSpec& spec, std::span<const Shape> shapes);

/// True when `spec` (normalized) has a hand-written kernel.
bool has_specialized_kernel(std::string_view spec);

/// Specs with hand-written kernels.
std::vector<std::string> specialized_specs();

}  // namespace lambdanet
