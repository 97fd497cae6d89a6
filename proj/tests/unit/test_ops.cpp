// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "lambdanet/ops.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

TEST(Ops, SoftmaxHandValues) {
  // exp(0) : exp(ln 3) = 1 : 3.
  Tensor t({1, 2}, {0.0, std::log(3.0)});
  const auto s = softmax(t, 1);
  EXPECT_NEAR(s[0], 0.25, 1e-15);
  EXPECT_NEAR(s[1], 0.75, 1e-15);
}

TEST(Ops, SoftmaxAxisAndStability) {
  Tensor t({2, 3}, {1000.0, 1001.0, 1002.0, -5.0, 0.0, 5.0});
  const auto s = softmax(t, 1);
  EXPECT_TRUE(all_finite(s));
  for (std::size_t r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += s.at({r, c});
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
  // Axis 0 normalizes columns.
  const auto c = softmax(t, 0);
  EXPECT_NEAR(c.at({0, 0}) + c.at({1, 0}), 1.0, 1e-15);
}

TEST(Ops, L2NormalizeHandValues) {
  Tensor t({2, 2}, {3.0, 4.0, 0.0, 0.0});
  const auto n = l2_normalize(t, 1);
  EXPECT_DOUBLE_EQ(n[0], 0.6);
  EXPECT_DOUBLE_EQ(n[1], 0.8);
  EXPECT_EQ(n[2], 0.0);
  EXPECT_EQ(n[3], 0.0);
}

TEST(Ops, ElementwiseWithSuffixBroadcast) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2}, {10, 20});
  EXPECT_EQ(add(a, b), Tensor({2, 2}, {11, 22, 13, 24}));
  EXPECT_EQ(sub(a, b), Tensor({2, 2}, {-9, -18, -7, -16}));
  EXPECT_EQ(mul(a, b), Tensor({2, 2}, {10, 40, 30, 80}));
  EXPECT_EQ(scale(a, 2.0), Tensor({2, 2}, {2, 4, 6, 8}));
  EXPECT_THROW(add(a, Tensor({3})), ShapeError);
}

TEST(Ops, Reductions) {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(sum_leading(a, 1), Tensor({3}, {5, 7, 9}));
  EXPECT_EQ(max_abs(Tensor({3}, {1, -7, 2})), 7.0);
  EXPECT_EQ(max_abs_diff(a, add(a, Tensor({3}, {0, 0.5, 0}))), 0.5);
  Tensor bad({2}, {1.0, NAN});
  EXPECT_FALSE(all_finite(bad));
}

}  // namespace
}  // namespace lambdanet
