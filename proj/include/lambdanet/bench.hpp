// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lambdanet/variants.hpp"

namespace lambdanet {

enum class Precision { kReference, kFast };

/// "reference" (f64) or "fast" (f32).
Precision parse_precision(std::string_view text);
std::string to_string(Precision p);

struct BenchOptions {
  std::size_t warmup = 5;
  std::size_t iterations = 30;
  Precision precision = Precision::kReference;
};

struct BenchPoint {
  Variant variant = Variant::kGlobal;
  LambdaConfig config;
  std::size_t b = 1;
  std::size_t n = 0;
  /// Instrumented multiplies of one forward pass, projections excluded.
  std::uint64_t multiplies = 0;
  std::size_t warmup = 0;
  std::size_t iterations = 0;
  // Wall time of one forward pass in seconds. Not deterministic.
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

/// Times variant_forward on seeded inputs. Single-threaded.
BenchPoint bench_forward(Variant variant, const LambdaConfig& config, std::size_t b, std::uint64_t seed,
                         const BenchOptions& options);

/// Sequence-length sweep: `base` with its geometry replaced by seq(n) for
/// each n. Timed iterations go round-robin over the lengths.
std::vector<BenchPoint> bench_sweep(Variant variant, const LambdaConfig& base, std::size_t b,
                                    std::span<const std::size_t> lengths, std::uint64_t seed,
                                    const BenchOptions& options);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares y = slope * x + intercept.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);
/// Least squares on log(x), log(y); the slope is the scaling exponent.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Layer used by the scaling sweeps: d = 32, k = 16, h = 4, v = 16, b = 1.
LambdaConfig scaling_config(PositionImpl impl, std::size_t scope);
/// n = 64, 128, 256, 384, 512, 768, 1024.
std::vector<std::size_t> conv_sweep_lengths();
/// n = 64, 96, 128, 192, 256, 384, 512.
std::vector<std::size_t> global_sweep_lengths();

}  // namespace lambdanet
