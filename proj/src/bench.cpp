// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>

#include "lambdanet/cost.hpp"
#include "lambdanet/rng.hpp"

namespace lambdanet {
namespace {

double quantile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Seeded inputs for one forward pass, ready to be timed repeatedly.
struct Workload {
  BenchPoint point;
  std::function<std::size_t()> run;  // returns the output size
};

template <class T>
std::function<std::size_t()> forward_fn(Variant variant, BasicTensor<T> x, BasicLambdaParams<T> params,
                                        LambdaConfig config, std::optional<MaskSpec> mask) {
  return [=] {
    const MaskSpec* m = mask ? &*mask : nullptr;
    return variant_forward(variant, x, x, params, config, m).size();
  };
}

Workload prepare(Variant variant, const LambdaConfig& config, std::size_t b, std::uint64_t seed,
                 const BenchOptions& options) {
  if (options.iterations == 0) throw ConfigError("bench needs at least one timed iteration");
  Workload w;
  auto& point = w.point;
  point.variant = variant;
  point.config = config;
  point.b = b;
  point.n = config.position.geometry.size();
  point.warmup = options.warmup;
  point.iterations = options.iterations;

  const auto params = init_variant_params(variant, config, seed);
  CounterRng rng(seed, Stream::kBench, 0);
  const auto x = random_normal({b, point.n, config.d_in}, rng);
  std::optional<MaskSpec> mask;
  if (variant == Variant::kMasked) mask = MaskSpec::causal(point.n);
  {
    cost::Counter counter;
    variant_forward(variant, x, x, params, config, mask ? &*mask : nullptr);
    point.multiplies = counter.layer_total();
  }
  w.run = options.precision == Precision::kFast
              ? forward_fn(variant, x.cast<float>(), params.cast<float>(), config, mask)
              : forward_fn(variant, x, params, config, mask);
  return w;
}

double time_once(const Workload& w) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto size = w.run();
  const auto t1 = std::chrono::steady_clock::now();
  if (size == 0) throw NumericError("empty output");
  return std::chrono::duration<double>(t1 - t0).count();
}

void summarize(BenchPoint& point, const std::vector<double>& times) {
  point.median = quantile(times, 0.5);
  point.p10 = quantile(times, 0.1);
  point.p90 = quantile(times, 0.9);
}

}  // namespace

Precision parse_precision(std::string_view text) {
  if (text == "reference" || text == "f64") return Precision::kReference;
  if (text == "fast" || text == "f32") return Precision::kFast;
  throw ConfigError("unknown precision '" + std::string(text) + "' (expected reference or fast)");
}

std::string to_string(Precision p) { return p == Precision::kFast ? "fast" : "reference"; }

BenchPoint bench_forward(Variant variant, const LambdaConfig& config, std::size_t b, std::uint64_t seed,
                         const BenchOptions& options) {
  auto w = prepare(variant, config, b, seed, options);
  for (std::size_t i = 0; i < options.warmup; ++i) w.run();
  std::vector<double> times;
  for (std::size_t i = 0; i < options.iterations; ++i) times.push_back(time_once(w));
  summarize(w.point, times);
  return w.point;
}

std::vector<BenchPoint> bench_sweep(Variant variant, const LambdaConfig& base, std::size_t b,
                                    std::span<const std::size_t> lengths, std::uint64_t seed,
                                    const BenchOptions& options) {
  std::vector<Workload> work;
  for (auto n : lengths) {
    LambdaConfig c = base;
    c.position.geometry = Geometry::seq(n);
    work.push_back(prepare(variant, c, b, seed, options));
  }
  for (std::size_t i = 0; i < options.warmup; ++i) {
    for (const auto& w : work) w.run();
  }
  // Round-robin over lengths so slow spells on the host hit every length
  // alike instead of bending the fit.
  std::vector<std::vector<double>> times(work.size());
  for (std::size_t i = 0; i < options.iterations; ++i) {
    for (std::size_t j = 0; j < work.size(); ++j) times[j].push_back(time_once(work[j]));
  }
  std::vector<BenchPoint> out;
  for (std::size_t j = 0; j < work.size(); ++j) {
    summarize(work[j].point, times[j]);
    out.push_back(work[j].point);
  }
  return out;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("a fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw ConfigError("log-log fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_linear(lx, ly);
}

LambdaConfig scaling_config(PositionImpl impl, std::size_t scope) {
  LambdaConfig c;
  c.d_in = 32;
  c.k = 16;
  c.h = 4;
  c.d_out = 64;
  c.impl = impl;
  c.position.geometry = Geometry::seq(64);
  if (scope > 0) c.position.scope = Scope{scope};
  return c;
}

std::vector<std::size_t> conv_sweep_lengths() { return {64, 128, 256, 384, 512, 768, 1024}; }

std::vector<std::size_t> global_sweep_lengths() { return {64, 96, 128, 192, 256, 384, 512}; }

}  // namespace lambdanet
