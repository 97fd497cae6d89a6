// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "lambdanet/tensor.hpp"

namespace lambdanet {

// Baseline attention kernels used to validate the complexity model. Queries
// are [b, h, n, k], keys [b, h, m, k], values [b, h, m, v]; outputs are
// [b, h, n, v]. Multiplies are recorded under the logits, relative and
// aggregate terms (content and apply for linear attention).

/// softmax_m(q k^T) v, optionally with relative logits q . e[n, m].
Tensor attention_forward(const Tensor& queries, const Tensor& keys, const Tensor& values,
                         const Tensor* relative_embeddings = nullptr);

/// (softmax_m(K)^T V)^T q per head.
Tensor linear_attention_forward(const Tensor& queries, const Tensor& keys, const Tensor& values);

/// Row attention followed by column attention over a height x width grid,
/// summed. n = m = height * width.
Tensor axial_attention_forward(const Tensor& queries, const Tensor& keys, const Tensor& values,
                               std::size_t height, std::size_t width);

}  // namespace lambdanet
