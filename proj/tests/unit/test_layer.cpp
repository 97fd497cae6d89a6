// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "lambdanet/attention.hpp"
#include "lambdanet/contract.hpp"
#include "lambdanet/reference.hpp"
#include "lambdanet/variants.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

using testing::randn;
using testing::small_config;

struct LayerCase {
  std::string geom;
  Boundary boundary;
  std::optional<Scope> scope;
  KeyNorm norm;
  bool hook;
};

class LayerOracle : public ::testing::TestWithParam<LayerCase> {};

TEST_P(LayerOracle, MatchesLoopOracle) {
  const auto& c = GetParam();
  auto cfg = small_config(Geometry::parse(c.geom), 3, 2, 2, 3);
  cfg.position.boundary = c.boundary;
  cfg.position.scope = c.scope;
  cfg.key_norm = c.norm;
  cfg.qv_hook = c.hook;
  const std::size_t n = cfg.position.geometry.size();
  auto params = init_params(cfg, 11);
  if (c.hook) {
    params.q_scale = randn(params.q_scale.shape(), 12);
    params.v_shift = randn(params.v_shift.shape(), 13);
  }
  const auto x = randn({2, n, 3}, 1), ctx = randn({2, n, 3}, 2);
  for (const auto impl : {PositionImpl::kEinsum, PositionImpl::kConv, PositionImpl::kDepthwise}) {
    if (impl != PositionImpl::kEinsum && c.boundary == Boundary::kCircular && !c.scope) continue;
    cfg.impl = impl;
    const auto y = lambda_layer_forward(x, ctx, params, cfg);
    const auto want = reference::layer_forward(Variant::kGlobal, x, ctx, params, cfg);
    ASSERT_EQ(y.shape(), (Shape{2, n, 4}));
    EXPECT_LE(max_abs_diff(y, want), 1e-12) << to_string(impl);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, LayerOracle,
    ::testing::Values(LayerCase{"seq:1", Boundary::kClamped, std::nullopt, KeyNorm::kSoftmax, false},
                      LayerCase{"seq:4", Boundary::kClamped, std::nullopt, KeyNorm::kSoftmax, false},
                      LayerCase{"seq:5", Boundary::kClamped, Scope{3}, KeyNorm::kL2, true},
                      LayerCase{"seq:4", Boundary::kCircular, std::nullopt, KeyNorm::kNone, false},
                      LayerCase{"seq:5", Boundary::kCircular, Scope{3}, KeyNorm::kSoftmax, true},
                      LayerCase{"grid:3x2", Boundary::kClamped, std::nullopt, KeyNorm::kSoftmax, false},
                      LayerCase{"grid:3x3", Boundary::kClamped, Scope{3, 1}, KeyNorm::kSoftmax, true},
                      LayerCase{"grid:3x3", Boundary::kCircular, Scope{3, 3}, KeyNorm::kL2, false}));

TEST(Layer, OutputIsLambdaAppliedPerQueryByHand) {
  // One query, one context position, k = v = 1: softmax over one key is 1, so
  // lambda = (1 + r[0]) * v and y = lambda * q.
  LambdaConfig cfg = small_config(Geometry::seq(1), 1, 1, 1, 1);
  LambdaParams p = init_params(cfg, 0);
  p.w_q = Tensor({1, 1}, {2.0});
  p.w_k = Tensor({1, 1}, {5.0});
  p.w_v = Tensor({1, 1}, {3.0});
  p.r = Tensor({1, 1}, {0.5});
  const Tensor x({1, 1, 1}, {1.0}), ctx({1, 1, 1}, {2.0});
  const auto y = lambda_layer_forward(x, ctx, p, cfg);
  EXPECT_DOUBLE_EQ(y[0], (1.0 + 0.5) * 6.0 * 2.0);
}

TEST(Layer, AdditiveDecompositionIsExact) {
  auto cfg = small_config(Geometry::grid(2, 3));
  const auto params = init_params(cfg, 3);
  const auto x = randn({2, 6, 3}, 4), ctx = randn({2, 6, 3}, 5);
  const auto full = lambda_layer_forward(x, ctx, params, cfg);
  cfg.interactions = Interactions::kContentOnly;
  const auto content = lambda_layer_forward(x, ctx, params, cfg);
  cfg.interactions = Interactions::kPositionOnly;
  const auto position = lambda_layer_forward(x, ctx, params, cfg);
  EXPECT_EQ(full, add(content, position));
}

TEST(Layer, ContentOnlyIsLinearAttention) {
  auto cfg = small_config(Geometry::seq(5), 3, 2, 2, 4);
  cfg.interactions = Interactions::kContentOnly;
  const auto params = init_params(cfg, 6);
  const auto x = randn({2, 5, 4}, 7), ctx = randn({2, 5, 4}, 8);
  const auto y = lambda_layer_forward(x, ctx, params, cfg);
  const auto qkv = project_qkv(x, ctx, params, cfg);
  // Broadcast the shared keys and values to each head.
  Tensor keys({2, 2, 5, 3}), values({2, 2, 5, 2});
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t k = 0; k < 3; ++k) keys.at({b, h, m, k}) = qkv.keys.at({b, m, k});
        for (std::size_t v = 0; v < 2; ++v) values.at({b, h, m, v}) = qkv.values.at({b, m, v});
      }
    }
  }
  const auto lin = linear_attention_forward(qkv.queries, keys, values);  // [b, h, n, v]
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t n = 0; n < 5; ++n) {
      for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t v = 0; v < 2; ++v) EXPECT_NEAR(y.at({b, n, h * 2 + v}), lin.at({b, h, n, v}), 1e-12);
      }
    }
  }
}

TEST(Layer, ContentOutputIsPermutationInvariantInContext) {
  auto cfg = small_config(Geometry::seq(4));
  cfg.interactions = Interactions::kContentOnly;
  const auto params = init_params(cfg, 1);
  const auto x = randn({1, 4, 3}, 2), ctx = randn({1, 4, 3}, 3);
  Tensor perm({1, 4, 3});
  const std::size_t order[] = {2, 0, 3, 1};
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t d = 0; d < 3; ++d) perm.at({0, m, d}) = ctx.at({0, order[m], d});
  }
  EXPECT_LE(max_abs_diff(lambda_layer_forward(x, ctx, params, cfg), lambda_layer_forward(x, perm, params, cfg)),
            1e-14);
}

TEST(Layer, KeyNormalization) {
  const auto keys = randn({2, 4, 3}, 9);
  const auto s = normalize_keys(keys, KeyNorm::kSoftmax);
  const auto l = normalize_keys(keys, KeyNorm::kL2);
  EXPECT_EQ(normalize_keys(keys, KeyNorm::kNone), keys);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t k = 0; k < 3; ++k) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t m = 0; m < 4; ++m) {
        sum += s.at({b, m, k});
        sq += l.at({b, m, k}) * l.at({b, m, k});
      }
      EXPECT_NEAR(sum, 1.0, 1e-15);
      EXPECT_NEAR(sq, 1.0, 1e-15);
    }
  }
}

TEST(Layer, ParametersAndConfig) {
  auto cfg = small_config(Geometry::grid(3, 3), 4, 2, 3, 5);
  const auto p = init_params(cfg, 1);
  EXPECT_EQ(p.w_q.shape(), (Shape{5, 8}));
  EXPECT_EQ(p.w_k.shape(), (Shape{5, 4}));
  EXPECT_EQ(p.w_v.shape(), (Shape{5, 3}));
  EXPECT_EQ(p.r.shape(), (Shape{25, 4}));
  EXPECT_EQ(num_buckets(cfg), 25u);
  EXPECT_EQ(p.parameter_count(), expected_parameter_count(cfg));
  EXPECT_EQ(expected_parameter_count(cfg), 5u * (8 + 4 + 3) + 25u * 4);
  EXPECT_EQ(init_params(cfg, 1).w_q, p.w_q);
  EXPECT_NE(init_params(cfg, 2).w_q, p.w_q);

  cfg.d_out = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.d_out = 6;
  cfg.k = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_key_norm("max"), ConfigError);
  EXPECT_EQ(parse_position_impl("depthwise"), PositionImpl::kDepthwise);
  EXPECT_EQ(parse_interactions("position-only"), Interactions::kPositionOnly);
}

TEST(Layer, InitVariances) {
  LambdaConfig cfg = small_config(Geometry::seq(8), 16, 4, 16, 64);
  const auto p = init_params(cfg, 5);
  auto var = [](const Tensor& t) {
    double s = 0.0;
    for (double x : t.data()) s += x * x;
    return s / static_cast<double>(t.size());
  };
  EXPECT_NEAR(var(p.w_q), 1.0 / (16 * 64), 0.2 / (16 * 64));
  EXPECT_NEAR(var(p.w_k), 1.0 / 64, 0.2 / 64);
  EXPECT_NEAR(var(p.r), 1.0, 0.2);
}

TEST(Layer, FloatMatchesDouble) {
  const auto cfg = small_config(Geometry::seq(6));
  const auto params = init_params(cfg, 2);
  const auto x = randn({2, 6, 3}, 1), ctx = randn({2, 6, 3}, 2);
  const auto y = lambda_layer_forward(x, ctx, params, cfg);
  const auto yf = lambda_layer_forward(x.cast<float>(), ctx.cast<float>(), params.cast<float>(), cfg);
  EXPECT_LE(max_abs_diff(yf.cast<double>(), y), 1e-5);
}

TEST(Layer, RejectsBadShapes) {
  const auto cfg = small_config(Geometry::seq(4));
  const auto params = init_params(cfg, 1);
  EXPECT_THROW(lambda_layer_forward(randn({1, 3, 3}, 1), randn({1, 3, 3}, 2), params, cfg), ShapeError);
  EXPECT_THROW(lambda_layer_forward(randn({1, 4, 2}, 1), randn({1, 4, 2}, 2), params, cfg), ShapeError);
}

}  // namespace
}  // namespace lambdanet
