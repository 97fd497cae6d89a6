// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lambdanet/tensor.hpp"

namespace lambdanet {
namespace {

TEST(Tensor, ShapeAndStrides) {
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.strides(), (std::vector<std::size_t>{12, 4, 1}));
  EXPECT_EQ(num_elements({2, 3, 4}), 24u);
  EXPECT_EQ(to_string(t.shape()), "[2,3,4]");
  for (double x : t.data()) EXPECT_EQ(x, 0.0);
}

TEST(Tensor, DefaultIsScalarZero) {
  Tensor t;
  EXPECT_EQ(t.rank(), 0u);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], 0.0);
}

TEST(Tensor, RowMajorIndexing) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.at({0, 0}), 1.0);
  EXPECT_EQ(t.at({0, 2}), 3.0);
  EXPECT_EQ(t.at({1, 0}), 4.0);
  EXPECT_EQ(t.at({1, 2}), 6.0);
  t.at({1, 1}) = 50.0;
  EXPECT_EQ(t[4], 50.0);
}

TEST(Tensor, Transpose) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto tt = t.transpose({1, 0});
  EXPECT_EQ(tt.shape(), (Shape{3, 2}));
  EXPECT_EQ(tt, Tensor({3, 2}, {1, 4, 2, 5, 3, 6}));

  Tensor c({2, 3, 4});
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<double>(i);
  const auto p = c.transpose({2, 0, 1});
  ASSERT_EQ(p.shape(), (Shape{4, 2, 3}));
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(p.at({d, a, b}), c.at({a, b, d}));
    }
  }
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto r = t.reshape({3, 2});
  EXPECT_EQ(r.at({2, 1}), 6.0);
  EXPECT_THROW(t.reshape({4, 2}), ShapeError);
}

TEST(Tensor, Cast) {
  Tensor t({2}, {0.1, -2.5});
  const auto f = t.cast<float>();
  EXPECT_EQ(f[0], 0.1f);
  EXPECT_EQ(f[1], -2.5f);
}

TEST(Tensor, Errors) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  Tensor t({2, 2});
  EXPECT_THROW(t.at({2, 0}), ShapeError);
  EXPECT_THROW(t.at({0}), ShapeError);
  EXPECT_THROW(t.extent(2), ShapeError);
  EXPECT_THROW(t.transpose({0, 0}), ShapeError);
  EXPECT_THROW(t.transpose({0}), ShapeError);
}

TEST(Tensor, AllocationsAreTracked) {
  memory::Scope scope;
  {
    Tensor t({16, 16});
    EXPECT_GE(scope.peak_transient_bytes(), static_cast<std::int64_t>(256 * sizeof(double)));
  }
  EXPECT_EQ(scope.largest_allocation(), static_cast<std::int64_t>(256 * sizeof(double)));
}

}  // namespace
}  // namespace lambdanet
