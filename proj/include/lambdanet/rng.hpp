// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "lambdanet/tensor.hpp"

namespace lambdanet {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED1A3BULL;

/// Independent draw streams. Adding draws to one stream never shifts another.
enum class Stream : std::uint64_t {
  kParams = 1,
  kData = 2,
  kMask = 3,
  kUpstream = 4,
  kShapes = 5,
  kBench = 6,
};

/// Counter-based generator: draw i of stream (seed, stream, substream) is
/// splitmix64_finalize(key + (i + 1) * 0x9E3779B97F4A7C15), where the key is
/// derived from the triple by the same finalizer. Normals use the Box-Muller
/// cosine branch with one fresh pair of uniforms per draw, so every value is a
/// pure function of its position in the stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  /// Uniform integer on [0, n).
  std::size_t below(std::size_t n) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept;

Tensor random_normal(Shape shape, CounterRng& rng, double stddev = 1.0);
Tensor random_uniform(Shape shape, CounterRng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace lambdanet
