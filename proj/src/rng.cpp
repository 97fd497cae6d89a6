// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/rng.hpp"

#include <cmath>
#include <numbers>

namespace lambdanet {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, Stream stream, std::uint64_t substream) noexcept
    : key_(splitmix64_finalize(seed ^ splitmix64_finalize(static_cast<std::uint64_t>(stream) * kGolden +
                                                           splitmix64_finalize(substream)))) {}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return splitmix64_finalize(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t CounterRng::below(std::size_t n) noexcept {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

Tensor random_normal(Shape shape, CounterRng& rng, double stddev) {
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = stddev * rng.normal();
  return t;
}

Tensor random_uniform(Shape shape, CounterRng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

}  // namespace lambdanet
