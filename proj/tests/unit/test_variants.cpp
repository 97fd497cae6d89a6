// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lambdanet/contract.hpp"
#include "lambdanet/memory.hpp"
#include "lambdanet/reference.hpp"
#include "lambdanet/variants.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

using testing::randn;
using testing::small_config;

TEST(Variants, ParseNames) {
  for (const auto v : {Variant::kGlobal, Variant::kMasked, Variant::kMultihead, Variant::kIntraDepth,
                       Variant::kContentOnly}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_variant("sparse"), ConfigError);
}

TEST(Variants, EveryVariantMatchesLoopOracle) {
  for (const auto norm : {KeyNorm::kSoftmax, KeyNorm::kL2, KeyNorm::kNone}) {
    auto cfg = small_config(Geometry::seq(5), 3, 2, 2, 3);
    cfg.key_norm = norm;
    cfg.qv_hook = true;
    const auto x = randn({2, 5, 3}, 1), ctx = randn({2, 5, 3}, 2);
    const auto mask = MaskSpec::causal(5);
    for (const auto v : {Variant::kGlobal, Variant::kMasked, Variant::kMultihead, Variant::kIntraDepth,
                         Variant::kContentOnly}) {
      auto c = cfg;
      if (v == Variant::kIntraDepth) c.u = 3;
      auto params = init_variant_params(v, c, 7);
      params.v_scale = randn(params.v_scale.shape(), 8);
      params.q_shift = randn(params.q_shift.shape(), 9);
      const MaskSpec* m = v == Variant::kMasked ? &mask : nullptr;
      const auto y = variant_forward(v, x, ctx, params, c, m);
      const auto want = reference::layer_forward(v, x, ctx, params, c, m);
      EXPECT_LE(max_abs_diff(y, want), 1e-12) << to_string(v) << " " << to_string(norm);
    }
  }
}

TEST(Variants, PerDepthNormalization) {
  auto cfg = small_config(Geometry::grid(2, 2));
  cfg.u = 2;
  cfg.intra_depth_norm = IntraDepthNorm::kPerDepth;
  const auto params = init_variant_params(Variant::kIntraDepth, cfg, 1);
  const auto x = randn({1, 4, 3}, 2), ctx = randn({1, 4, 3}, 3);
  EXPECT_LE(max_abs_diff(intra_depth_forward(x, ctx, params, cfg),
                         reference::layer_forward(Variant::kIntraDepth, x, ctx, params, cfg)),
            1e-12);
}

TEST(Variants, CausalOutputIgnoresFutureContext) {
  const auto cfg = small_config(Geometry::seq(6));
  const auto params = init_params(cfg, 1);
  const auto x = randn({1, 6, 3}, 2);
  auto ctx = randn({1, 6, 3}, 3);
  const auto mask = MaskSpec::causal(6);
  const auto before = masked_lambda_forward(x, ctx, params, cfg, mask);
  for (std::size_t d = 0; d < 3; ++d) ctx.at({0, 4, d}) += 10.0;
  const auto after = masked_lambda_forward(x, ctx, params, cfg, mask);
  for (std::size_t n = 0; n < 4; ++n) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(after.at({0, n, c}), before.at({0, n, c}));
  }
  EXPECT_NE(after.at({0, 4, 0}), before.at({0, 4, 0}));
}

TEST(Variants, MaskValidation) {
  EXPECT_THROW(MaskSpec{Tensor({2, 2}, {1, 0, 0, 0})}.validate(2, 2), ConfigError);
  EXPECT_THROW(MaskSpec{Tensor({2, 2}, {1, 0.5, 1, 1})}.validate(2, 2), ConfigError);
  EXPECT_THROW(MaskSpec::causal(3).validate(3, 4), ConfigError);
  EXPECT_NO_THROW(MaskSpec::causal(3).validate(3, 3));
}

TEST(Variants, MaskedPathAvoidsQuadraticPerHeadArrays) {
  auto cfg = small_config(Geometry::seq(48), 4, 4, 4, 4);
  const auto params = init_params(cfg, 1);
  const auto x = randn({2, 48, 4}, 2), ctx = randn({2, 48, 4}, 3);
  const auto mask = MaskSpec::causal(48);
  memory::Scope scope;
  masked_lambda_forward(x, ctx, params, cfg, mask);
  // A [b, h, n, m] array of doubles.
  EXPECT_LT(scope.largest_allocation(), static_cast<std::int64_t>(2 * 4 * 48 * 48 * sizeof(double)));
}

TEST(Variants, CollapsesToDefaultLayer) {
  const auto cfg = small_config(Geometry::seq(4));
  const auto x = randn({2, 4, 3}, 1), ctx = randn({2, 4, 3}, 2);
  const auto params = init_params(cfg, 3);
  const auto y = lambda_layer_forward(x, ctx, params, cfg);
  EXPECT_EQ(intra_depth_forward(x, ctx, params, cfg), y);

  auto h1 = small_config(Geometry::seq(4), 3, 1, 2, 3);
  const auto p1 = init_params(h1, 4);
  auto heads = p1;
  heads.r = p1.r.reshape({1, p1.r.extent(0), p1.r.extent(1)});
  EXPECT_EQ(multihead_lambda_forward(x, ctx, heads, h1), lambda_layer_forward(x, ctx, p1, h1));

  auto zero = params;
  zero.r = Tensor(params.r.shape());
  auto content = cfg;
  content.interactions = Interactions::kContentOnly;
  EXPECT_EQ(lambda_layer_forward(x, ctx, zero, cfg), content_only_forward(x, ctx, params, content));
}

TEST(Variants, ForcedLambdas) {
  const auto w = randn({2, 3}, 1);
  const auto lam = diagonal_lambda(w);
  ASSERT_EQ(lam.shape(), (Shape{2, 3, 3}));
  EXPECT_EQ(lam.at({1, 2, 2}), w.at({1, 2}));
  EXPECT_EQ(lam.at({1, 2, 1}), 0.0);
  const auto s = scalar_lambdas(Tensor({1, 2}, {2.0, -1.0}), 2);
  EXPECT_EQ(s, Tensor({1, 2, 2, 2}, {2, 0, 0, 2, -1, 0, 0, -1}));
}

TEST(Variants, MultiheadParameterLayout) {
  auto cfg = small_config(Geometry::seq(3), 2, 3, 2, 4);
  const auto p = init_multihead_params(cfg, 1);
  EXPECT_EQ(p.w_k.shape(), (Shape{4, 6}));
  EXPECT_EQ(p.w_v.shape(), (Shape{4, 6}));
  EXPECT_EQ(p.r.shape(), (Shape{3, 5, 2}));
}

}  // namespace
}  // namespace lambdanet
