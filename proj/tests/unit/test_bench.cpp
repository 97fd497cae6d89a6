// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "lambdanet/bench.hpp"
#include "lambdanet/complexity.hpp"

namespace lambdanet {
namespace {

TEST(Bench, LinearFitRecoversLine) {
  const double x[] = {1, 2, 3, 4}, y[] = {3, 5, 7, 9};
  const auto f = fit_linear(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Bench, LogLogFitRecoversExponent) {
  std::vector<double> x, y;
  for (double n : {64.0, 128.0, 256.0, 512.0}) {
    x.push_back(n);
    y.push_back(3e-9 * n * n);
  }
  EXPECT_NEAR(fit_loglog(x, y).slope, 2.0, 1e-12);
}

TEST(Bench, PointsCarryMultipliesAndQuantiles) {
  BenchOptions o;
  auto cfg = scaling_config(PositionImpl::kConv, 5);
  cfg.position.geometry = Geometry::seq(32);
  const auto conv = bench_forward(Variant::kGlobal, cfg, 1, 1, o);
  cfg.impl = PositionImpl::kDepthwise;
  const auto depthwise = bench_forward(Variant::kGlobal, cfg, 1, 1, o);
  EXPECT_EQ(conv.multiplies, depthwise.multiplies);
  EXPECT_EQ(conv.iterations, 30u);
  EXPECT_EQ(conv.warmup, 5u);
  EXPECT_LE(conv.p10, conv.median);
  EXPECT_LE(conv.median, conv.p90);

  DimSet d;
  d.b = 1;
  d.n = 32;
  d.m = 32;
  d.r = 5;
  d.k = 16;
  d.v = 16;
  d.h = 4;
  d.d = 64;
  d.u = 1;
  EXPECT_EQ(conv.multiplies, time_cost(OpKind::kLambdaConv, d).multiplies);
}

TEST(Bench, FastPrecisionRuns) {
  BenchOptions o;
  o.precision = Precision::kFast;
  auto cfg = scaling_config(PositionImpl::kEinsum, 0);
  cfg.position.geometry = Geometry::seq(16);
  EXPECT_GT(bench_forward(Variant::kGlobal, cfg, 1, 1, o).median, 0.0);
  EXPECT_EQ(parse_precision("f32"), Precision::kFast);
  EXPECT_EQ(parse_precision("reference"), Precision::kReference);
  EXPECT_THROW(parse_precision("f16"), ConfigError);
}

TEST(Bench, SweepLengths) {
  EXPECT_EQ(conv_sweep_lengths().front(), 64u);
  EXPECT_EQ(conv_sweep_lengths().back(), 1024u);
  const std::size_t lengths[] = {8, 16};
  const auto pts = bench_sweep(Variant::kGlobal, scaling_config(PositionImpl::kConv, 3), 1, lengths, 1, BenchOptions{});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].multiplies, 2 * pts[0].multiplies);
}

}  // namespace
}  // namespace lambdanet
