// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lambdanet/attention.hpp"
#include "lambdanet/complexity.hpp"
#include "lambdanet/cost.hpp"
#include "lambdanet/variants.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

using testing::randn;

DimSet dims(std::uint64_t b, std::uint64_t n, std::uint64_t k, std::uint64_t v, std::uint64_t h) {
  DimSet d;
  d.b = b;
  d.n = n;
  d.m = n;
  d.k = k;
  d.v = v;
  d.h = h;
  d.d = v * h;
  d.u = 1;
  d.l = 1;
  return d;
}

TEST(Complexity, LambdaTimeByHand) {
  const auto r = time_cost(OpKind::kLambda, dims(2, 3, 2, 5, 2));
  EXPECT_EQ(r.terms.at("content"), 2u * 3 * 2 * 5);       // b m k v
  EXPECT_EQ(r.terms.at("position"), 2u * 3 * 3 * 2 * 5);  // b n m k v
  EXPECT_EQ(r.terms.at("apply"), 2u * 2 * 2 * 3 * 2 * 5); // two terms of b h n k v
  EXPECT_EQ(r.multiplies, 60u + 180u + 240u);
  EXPECT_EQ(r.flops(), 2 * r.multiplies);
}

TEST(Complexity, MultiheadGenerationCostsHTimesMore) {
  for (std::uint64_t h = 1; h <= 4; ++h) {
    const auto d = dims(2, 4, 3, 2, h);
    const auto mq = time_cost(OpKind::kLambda, d);
    const auto mh = time_cost(OpKind::kMultiheadLambda, d);
    EXPECT_EQ(mh.terms.at("content"), h * mq.terms.at("content"));
    EXPECT_EQ(mh.terms.at("position"), h * mq.terms.at("position"));
  }
}

TEST(Complexity, AttentionTimeByHand) {
  const auto r = time_cost(OpKind::kAttention, dims(2, 3, 2, 5, 2));
  EXPECT_EQ(r.terms.at("logits"), 2u * 2 * 3 * 3 * 2);     // b h n m k
  EXPECT_EQ(r.terms.at("aggregate"), 2u * 2 * 3 * 3 * 5);  // b h n m v
}

TEST(Complexity, ModelEqualsInstrumentedLayer) {
  const auto cfg = testing::small_config(Geometry::seq(4), 3, 2, 2, 3);
  const auto params = init_params(cfg, 1);
  const auto x = randn({2, 4, 3}, 2);
  cost::Counter counter;
  lambda_layer_forward(x, x, params, cfg);
  const auto model = time_cost(OpKind::kLambda, dims(2, 4, 3, 2, 2));
  EXPECT_EQ(counter.layer_total(), model.multiplies);
  EXPECT_EQ(counter.get(cost::term::kContent), model.terms.at("content"));
  EXPECT_EQ(counter.get(cost::term::kPosition), model.terms.at("position"));
  EXPECT_EQ(counter.get(cost::term::kApply), model.terms.at("apply"));
  EXPECT_GT(counter.get(cost::term::kProjection), 0u);
  EXPECT_EQ(counter.total(), counter.layer_total() + counter.get(cost::term::kProjection) +
                                 counter.get(cost::term::kUntracked));
}

TEST(Complexity, AttentionModelEqualsInstrumentedKernel) {
  const auto q = randn({2, 2, 3, 2}, 1), k = randn({2, 2, 3, 2}, 2), v = randn({2, 2, 3, 5}, 3);
  cost::Counter counter;
  attention_forward(q, k, v);
  EXPECT_EQ(counter.layer_total(), time_cost(OpKind::kAttention, dims(2, 3, 2, 5, 2)).multiplies);
}

TEST(Complexity, CountersNest) {
  cost::Counter outer;
  outer.add(cost::term::kContent, 5);
  {
    cost::Counter inner;
    cost::record(3);
    EXPECT_EQ(inner.get(cost::term::kUntracked), 3u);
  }
  EXPECT_EQ(outer.get(cost::term::kContent), 5u);
}

TEST(Complexity, MissingDimsAndParsing) {
  DimSet d;
  d.b = 1;
  EXPECT_THROW(time_cost(OpKind::kLambda, d), ConfigError);
  for (const auto op : all_op_kinds()) EXPECT_EQ(parse_op_kind(to_string(op)), op);
  EXPECT_THROW(parse_op_kind("conv"), ConfigError);
}

TEST(Memory, DefaultReportRows) {
  const auto report = memory_report(default_stages(), MemoryOptions{});
  auto gib = [&](const char* row) { return report.row(row).gib(); };
  EXPECT_NEAR(gib("lambda layer (k=16)"), 1.9, 1.9 * 0.02);
  EXPECT_NEAR(gib("lambda layer (k=8)"), 0.95, 0.95 * 0.02);
  EXPECT_NEAR(gib("lambda layer (shared embeddings)"), 0.63, 0.63 * 0.02);
  EXPECT_NEAR(gib("axial attention"), 4.8, 4.8 * 0.02);
  EXPECT_NEAR(gib("global attention"), 120.0, 120.0 * 0.15);
  EXPECT_THROW(report.row("nope"), ConfigError);
}

TEST(Memory, EmbeddingsByHand) {
  // One stage of one 2x2 layer: |n| * |m| * k floats.
  const auto report = memory_report(StageSpec::parse("1x2"), MemoryOptions{});
  EXPECT_EQ(report.row("lambda layer (k=16)").bytes, 4u * 4u * 16u * 4u);
  // Attention maps: b * h * n * m floats.
  EXPECT_EQ(report.row("global attention").bytes, 128u * 8u * 4u * 4u * 4u);
}

TEST(Memory, SingleLayerAttentionIs64GiB) {
  DimSet d;
  d.b = 128;
  d.h = 8;
  d.n = 64 * 64;
  d.m = 64 * 64;
  EXPECT_EQ(space_cost(OpKind::kAttention, d).bytes, 64ULL << 30);
}

TEST(Memory, StageSpecParsing) {
  const auto s = StageSpec::parse("3x56,4x28");
  ASSERT_EQ(s.stages.size(), 2u);
  EXPECT_EQ(s.stages[1].layers, 4u);
  EXPECT_EQ(s.stages[1].side, 28u);
  EXPECT_EQ(s.str(), "3x56,4x28");
  EXPECT_EQ(default_stages().str(), "3x56,4x28,6x14,3x7");
  EXPECT_THROW(StageSpec::parse("0x56"), ConfigError);
  EXPECT_THROW(StageSpec::parse("3x"), ConfigError);
  EXPECT_THROW(StageSpec::parse(""), ConfigError);
}

}  // namespace
}  // namespace lambdanet
