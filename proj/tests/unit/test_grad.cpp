// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "lambdanet/contract.hpp"
#include "lambdanet/grad.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

using testing::randn;
using testing::small_config;

TEST(Grad, FiniteDifferenceOfKnownFunction) {
  // f(t) = sum t^3, df/dt = 3 t^2.
  const Tensor theta({3}, {0.5, -1.0, 2.0});
  const Tensor analytic({3}, {0.75, 3.0, 12.0});
  const auto r = finite_diff_check(
      "cube",
      [](const Tensor& t) {
        long double s = 0;
        for (double x : t.data()) s += static_cast<long double>(x) * x * x;
        return s;
      },
      theta, analytic, 1e-5);
  EXPECT_EQ(r.coordinates, 3u);
  EXPECT_LT(r.max_rel_error, 1e-8);

  const Tensor wrong({3}, {0.75, 3.0, 13.0});
  const auto bad = finite_diff_check(
      "cube",
      [](const Tensor& t) {
        long double s = 0;
        for (double x : t.data()) s += static_cast<long double>(x) * x * x;
        return s;
      },
      theta, wrong, 1e-5);
  EXPECT_EQ(bad.worst_index, 2u);
  EXPECT_NEAR(bad.max_rel_error, 1.0 / 13.0, 1e-6);
}

TEST(Grad, NonFiniteLossThrows) {
  EXPECT_THROW(finite_diff_check("nan", [](const Tensor&) { return static_cast<long double>(NAN); }, Tensor({1}),
                                 Tensor({1}), 1e-5),
               NumericError);
}

TEST(Grad, SoftmaxBackwardMatchesJacobian) {
  const auto x = randn({2, 4}, 1);
  const auto y = softmax(x, 1);
  const auto g = randn({2, 4}, 2);
  const auto dx = softmax_backward(y, g, 1);
  // dx_i = y_i (g_i - sum_j g_j y_j).
  for (std::size_t r = 0; r < 2; ++r) {
    double dot = 0.0;
    for (std::size_t j = 0; j < 4; ++j) dot += g.at({r, j}) * y.at({r, j});
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(dx.at({r, i}), y.at({r, i}) * (g.at({r, i}) - dot), 1e-15);
  }
}

TEST(Grad, L2BackwardMatchesFiniteDifferences) {
  const auto x = randn({3, 4}, 3);
  const auto g = randn({3, 4}, 4);
  const auto analytic = l2_normalize_backward(x, g, 1);
  const auto r = finite_diff_check(
      "l2",
      [&](const Tensor& t) {
        const auto y = l2_normalize(t, 1);
        long double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<long double>(y[i]) * g[i];
        return s;
      },
      x, analytic, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Grad, RandomFunctionalIsSeeded) {
  EXPECT_EQ(random_functional({3, 2}, 1), random_functional({3, 2}, 1));
  EXPECT_NE(random_functional({3, 2}, 1), random_functional({3, 2}, 2));
}

TEST(Grad, EveryVariantPassesAtDefaultShape) {
  for (const auto v : {Variant::kGlobal, Variant::kMasked, Variant::kMultihead, Variant::kIntraDepth,
                       Variant::kContentOnly}) {
    auto cfg = small_config(Geometry::seq(4), 3, 2, 2, 3);
    cfg.qv_hook = true;
    if (v == Variant::kIntraDepth) cfg.u = 2;
    if (v == Variant::kContentOnly) cfg.interactions = Interactions::kContentOnly;
    const auto report = gradient_check(v, cfg, 2, kDefaultSeed);
    EXPECT_LT(report.max_rel_error(), 1e-6) << to_string(v);
    EXPECT_GE(report.entries.size(), 6u);
  }
}

TEST(Grad, ConvPathsPass) {
  for (const auto impl : {PositionImpl::kConv, PositionImpl::kDepthwise}) {
    auto cfg = small_config(Geometry::grid(3, 3), 2, 2, 2, 2);
    cfg.impl = impl;
    cfg.position.scope = Scope{3, 3};
    EXPECT_LT(gradient_check(Variant::kGlobal, cfg, 1, kDefaultSeed).max_rel_error(), 1e-6) << to_string(impl);
  }
}

TEST(Grad, AdditiveAcrossInteractions) {
  auto cfg = small_config(Geometry::seq(4));
  const auto params = init_params(cfg, 1);
  const auto x = randn({1, 4, 3}, 2), ctx = randn({1, 4, 3}, 3);
  const auto up = random_functional({1, 4, 4}, 4);
  const auto full = backward(Variant::kGlobal, x, ctx, params, cfg, up);
  cfg.interactions = Interactions::kContentOnly;
  const auto content = backward(Variant::kGlobal, x, ctx, params, cfg, up);
  cfg.interactions = Interactions::kPositionOnly;
  const auto position = backward(Variant::kGlobal, x, ctx, params, cfg, up);
  EXPECT_LE(max_abs_diff(full.w_v, add(content.w_v, position.w_v)), 1e-12);
  EXPECT_LE(max_abs_diff(full.x, add(content.x, position.x)), 1e-12);
  EXPECT_EQ(content.r, Tensor(content.r.shape()));
}

}  // namespace
}  // namespace lambdanet
