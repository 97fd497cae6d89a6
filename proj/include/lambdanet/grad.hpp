// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lambdanet/variants.hpp"

namespace lambdanet {

/// Gradients of a scalar loss with respect to every primal of a layer, each
/// shaped like its primal. Hook gradients are zero when the hook is off.
struct GradBundle {
  Tensor x, context;
  Tensor w_q, w_k, w_v, r;
  Tensor q_scale, q_shift, v_scale, v_shift;
};

/// Reverse-mode derivative of variant_forward given dL/dY (`upstream`, shaped
/// like the forward output). When the layer is self-attending, the total input
/// gradient is x + context.
GradBundle backward(Variant variant, const Tensor& x, const Tensor& context,
                    const LambdaParams& params, const LambdaConfig& config, const Tensor& upstream,
                    const MaskSpec* mask = nullptr);

/// Adjoint of the softmax along `axis` evaluated at output `y`.
Tensor softmax_backward(const Tensor& y, const Tensor& grad, std::size_t axis);

/// Adjoint of l2_normalize along `axis` at input `x`.
Tensor l2_normalize_backward(const Tensor& x, const Tensor& grad, std::size_t axis);

struct FiniteDiffResult {
  std::string name;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central differences (f(t + h) - f(t - h)) / 2h for every coordinate of
/// `theta`, with the loss kept in extended precision until the subtraction and
/// 2h taken as the rounded step actually applied. Compared against
/// `analytic` with relative error
/// |a - n| / max(|a|, |n|, 1e-8). Throws NumericError if f is non-finite.
FiniteDiffResult finite_diff_check(const std::string& name,
                                   const std::function<long double(const Tensor&)>& f, const Tensor& theta,
                                   const Tensor& analytic, double step);

/// Loss L(Y) = sum(G * Y) with G drawn from the upstream stream of `seed`.
/// Returns G, which is also dL/dY.
Tensor random_functional(const Shape& shape, std::uint64_t seed);

struct GradCheckReport {
  Variant variant = Variant::kGlobal;
  std::vector<FiniteDiffResult> entries;

  double max_rel_error() const;
};

/// Finite-difference check of backward() for every primal (inputs, context,
/// projections, embeddings, and the hook vectors when the hook is on). Inputs
/// and parameters are drawn from `seed`; masked runs use a causal mask.
GradCheckReport gradient_check(Variant variant, const LambdaConfig& config, std::size_t batch,
                               std::uint64_t seed, double step = 1e-5);

}  // namespace lambdanet
