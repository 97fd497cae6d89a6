// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <vector>

#include "lambdanet/contract.hpp"
#include "lambdanet/relpos.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

std::vector<int> table_of(const RelIndexMap& map) {
  const auto t = map.table();
  return {t.begin(), t.end()};
}

TEST(RelPos, ClampedSeqTable) {
  // Bucket = (m - n) + 2 over 5 buckets.
  const auto map = RelIndexMap::build(Geometry::seq(3), Geometry::seq(3), Boundary::kClamped, std::nullopt);
  EXPECT_EQ(map.num_buckets(), 5u);
  EXPECT_EQ(table_of(map), (std::vector<int>{2, 3, 4, 1, 2, 3, 0, 1, 2}));
}

TEST(RelPos, CircularSeqTable) {
  // Bucket = (m - n) mod 3.
  const auto map = RelIndexMap::build(Geometry::seq(3), Geometry::seq(3), Boundary::kCircular, std::nullopt);
  EXPECT_EQ(map.num_buckets(), 3u);
  EXPECT_EQ(table_of(map), (std::vector<int>{0, 1, 2, 2, 0, 1, 1, 2, 0}));
}

TEST(RelPos, ScopedTables) {
  const int x = kOutOfScope;
  const auto clamped = RelIndexMap::build(Geometry::seq(4), Geometry::seq(4), Boundary::kClamped, Scope{3});
  EXPECT_EQ(clamped.num_buckets(), 3u);
  EXPECT_EQ(table_of(clamped), (std::vector<int>{1, 2, x, x, 0, 1, 2, x, x, 0, 1, 2, x, x, 0, 1}));
  const auto circular = RelIndexMap::build(Geometry::seq(4), Geometry::seq(4), Boundary::kCircular, Scope{3});
  EXPECT_EQ(table_of(circular), (std::vector<int>{1, 2, x, 0, 0, 1, 2, x, x, 0, 1, 2, 2, x, 0, 1}));
}

TEST(RelPos, GridBucketsAreRowMajorPerAxis) {
  const auto g = Geometry::grid(2, 3);
  const auto map = RelIndexMap::build(g, g, Boundary::kClamped, std::nullopt);
  EXPECT_EQ(map.num_buckets(), 3u * 5u);
  for (std::size_t n = 0; n < 6; ++n) {
    for (std::size_t m = 0; m < 6; ++m) {
      const int dr = static_cast<int>(m / 3) - static_cast<int>(n / 3);
      const int dc = static_cast<int>(m % 3) - static_cast<int>(n % 3);
      EXPECT_EQ(map.bucket(n, m), (dr + 1) * 5 + (dc + 2));
      EXPECT_EQ(map.table()[n * 6 + m], map.bucket(n, m));
    }
  }
}

TEST(RelPos, TranslationInvariance) {
  const auto g = Geometry::grid(4, 4);
  for (const auto boundary : {Boundary::kClamped, Boundary::kCircular}) {
    const auto map = RelIndexMap::build(g, g, boundary, Scope{3, 3});
    for (std::size_t n = 0; n < 16; ++n) {
      for (std::size_t m = 0; m < 16; ++m) {
        // Shift both positions by one column where the shift stays in range.
        if (boundary == Boundary::kClamped && (n % 4 == 3 || m % 4 == 3)) continue;
        const std::size_t n2 = n / 4 * 4 + (n % 4 + 1) % 4, m2 = m / 4 * 4 + (m % 4 + 1) % 4;
        EXPECT_EQ(map.bucket(n, m), map.bucket(n2, m2));
      }
    }
  }
}

TEST(RelPos, ParsingAndValidation) {
  EXPECT_EQ(Geometry::parse("seq:7"), Geometry::seq(7));
  EXPECT_EQ(Geometry::parse("grid:3x5"), Geometry::grid(3, 5));
  EXPECT_EQ(Geometry::grid(3, 5).str(), "grid:3x5");
  EXPECT_EQ(Geometry::grid(3, 5).coords(7), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(parse_scope("3x5"), (Scope{3, 5}));
  EXPECT_EQ(scope_str(Scope{3, 5}), "3x5");
  EXPECT_THROW(Geometry::parse("cube:2x2x2"), ConfigError);
  EXPECT_THROW(Geometry::parse("seq:2x2"), ConfigError);
  EXPECT_THROW(parse_boundary("reflect"), ConfigError);

  const auto s4 = Geometry::seq(4);
  EXPECT_THROW(RelIndexMap::build(s4, s4, Boundary::kClamped, Scope{2}), ConfigError);
  EXPECT_NO_THROW(RelIndexMap::build(s4, s4, Boundary::kClamped, Scope{7}));
  EXPECT_THROW(RelIndexMap::build(s4, s4, Boundary::kClamped, Scope{9}), ConfigError);
  EXPECT_THROW(RelIndexMap::build(s4, s4, Boundary::kCircular, Scope{5}), ConfigError);
  EXPECT_THROW(RelIndexMap::build(s4, Geometry::seq(5), Boundary::kClamped, std::nullopt), ConfigError);
  const auto g = Geometry::grid(3, 3);
  EXPECT_THROW(RelIndexMap::build(g, g, Boundary::kClamped, Scope{3}), ConfigError);
}

TEST(RelPos, ExpandEmbeddingsLooksUpBuckets) {
  const auto map = RelIndexMap::build(Geometry::seq(3), Geometry::seq(3), Boundary::kClamped, Scope{3});
  const auto r = testing::randn({3, 2}, 1);
  const auto e = expand_embeddings(map, r);
  ASSERT_EQ(e.shape(), (Shape{3, 3, 2}));
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t m = 0; m < 3; ++m) {
      const int bucket = map.bucket(n, m);
      for (std::size_t k = 0; k < 2; ++k) {
        const double want = bucket == kOutOfScope ? 0.0 : r.at({static_cast<std::size_t>(bucket), k});
        EXPECT_EQ(e.at({n, m, k}), want);
      }
    }
  }
}

TEST(RelPos, ScatterIsAdjointOfExpand) {
  // <expand(R), G> == <R, scatter(G)>.
  const auto g = Geometry::grid(3, 2);
  const auto map = RelIndexMap::build(g, g, Boundary::kCircular, std::nullopt);
  const auto r = testing::randn({map.num_buckets(), 4}, 2);
  const auto grad = testing::randn({6, 6, 4}, 3);
  const double lhs = contract("nmk,nmk->", expand_embeddings(map, r), grad)[0];
  const double rhs = contract("rk,rk->", r, scatter_embedding_grad(map, grad))[0];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(RelPos, CausalMaskAndTensorExport) {
  EXPECT_EQ(build_causal_mask(3), Tensor({3, 3}, {1, 0, 0, 1, 1, 0, 1, 1, 1}));
  const auto map = RelIndexMap::build(Geometry::seq(2), Geometry::seq(2), Boundary::kClamped, Scope{1});
  EXPECT_EQ(map.to_tensor(), Tensor({2, 2}, {0, -1, -1, 0}));
}

TEST(RelPos, WindowForConvPath) {
  const auto g = Geometry::grid(4, 4);
  EXPECT_EQ(RelIndexMap::build(g, g, Boundary::kClamped, Scope{3, 5}).window(), (std::vector<std::size_t>{3, 5}));
  EXPECT_THROW(RelIndexMap::build(g, g, Boundary::kCircular, std::nullopt).window(), ConfigError);
  const auto map = RelIndexMap::build(Geometry::seq(5), Geometry::seq(5), Boundary::kClamped, Scope{3});
  const long left[] = {-1}, far[] = {2};
  EXPECT_EQ(map.bucket_for_offset(left), 0);
  EXPECT_EQ(map.bucket_for_offset(far), kOutOfScope);
}

}  // namespace
}  // namespace lambdanet
