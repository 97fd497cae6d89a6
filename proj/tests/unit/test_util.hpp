// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "lambdanet/lambda_layer.hpp"
#include "lambdanet/ops.hpp"
#include "lambdanet/rng.hpp"

namespace lambdanet::testing {

inline Tensor randn(Shape shape, std::uint64_t seed, std::uint64_t substream = 0) {
  CounterRng rng(seed, Stream::kData, substream);
  return random_normal(std::move(shape), rng);
}

inline LambdaConfig small_config(Geometry geometry, std::size_t k = 3, std::size_t h = 2, std::size_t v = 2,
                                 std::size_t d_in = 3) {
  LambdaConfig c;
  c.d_in = d_in;
  c.k = k;
  c.h = h;
  c.d_out = h * v;
  c.position.geometry = std::move(geometry);
  return c;
}

}  // namespace lambdanet::testing
