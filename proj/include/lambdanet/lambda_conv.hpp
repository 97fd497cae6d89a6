// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lambdanet/relpos.hpp"
#include "lambdanet/tensor.hpp"

namespace lambdanet {

// Local position lambdas computed as convolutions over the values. Both
// implementations produce [b, n, k, v] from the embedding table R [|r|, k]
// (or [|r|, k, u]) and values [b, n, v] (or [b, n, v, u]) laid out in the
// map's geometry. Taps follow the map's window; positions outside a clamped
// geometry read zero padding, circular geometries wrap around.
//
// lambda_p[b, n, k, v] = sum over taps t, then u, of
//     R[bucket(t), k, u] * V[b, n + offset(t), v, u]

/// Regular (n+1)-d convolution that treats the value depth as an extra
/// spatial axis with a kernel extent of one and k output channels.
template <class T>
BasicTensor<T> position_lambdas_conv(const BasicTensor<T>& table, const BasicTensor<T>& values,
                                     const RelIndexMap& map);

/// n-d depthwise convolution over the v channels with channel multiplier k,
/// using R tiled across channels. Requires u == 1.
template <class T>
BasicTensor<T> position_lambdas_depthwise(const BasicTensor<T>& table, const BasicTensor<T>& values,
                                          const RelIndexMap& map);

struct ConvGrads {
  Tensor table;
  Tensor values;
};

ConvGrads position_lambdas_conv_backward(const Tensor& table, const Tensor& values,
                                         const RelIndexMap& map, const Tensor& grad);
ConvGrads position_lambdas_depthwise_backward(const Tensor& table, const Tensor& values,
                                              const RelIndexMap& map, const Tensor& grad);

}  // namespace lambdanet
