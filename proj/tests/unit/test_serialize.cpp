// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "lambdanet/serialize.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

TEST(Serialize, HeaderLayout) {
  std::ostringstream os;
  write_tensor(os, Tensor({2}, {1.0, -1.0}));
  const std::string bytes = os.str();
  ASSERT_EQ(bytes.size(), 4u + 3u + 8u + 16u);
  EXPECT_EQ(bytes.substr(0, 4), "LTNS");
  EXPECT_EQ(static_cast<int>(bytes[4]), 1);  // version
  EXPECT_EQ(static_cast<int>(bytes[5]), 0);  // f64
  EXPECT_EQ(static_cast<int>(bytes[6]), 1);  // rank
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 2u);
}

TEST(Serialize, RoundTripBothDtypes) {
  const auto t = testing::randn({3, 4, 2}, 5);
  std::stringstream ss;
  write_tensor(ss, t);
  write_tensor(ss, t.cast<float>());
  const auto a = read_tensor(ss);
  const auto b = read_tensor(ss);
  ASSERT_TRUE(std::holds_alternative<Tensor>(a));
  ASSERT_TRUE(std::holds_alternative<TensorF>(b));
  EXPECT_EQ(std::get<Tensor>(a), t);
  EXPECT_EQ(std::get<TensorF>(b), t.cast<float>());
}

TEST(Serialize, FileRoundTripWidens) {
  const auto path = std::filesystem::temp_directory_path() / "lambdanet_serialize_test.ltns";
  const auto t = testing::randn({5}, 6);
  save_tensor(path, t.cast<float>());
  EXPECT_EQ(load_tensor_f64(path), t.cast<float>().cast<double>());
  save_tensor(path, t);
  EXPECT_EQ(std::get<Tensor>(load_tensor(path)), t);
  std::filesystem::remove(path);
}

TEST(Serialize, RejectsBadStreams) {
  std::istringstream bad_magic("XXXX\x01\x00\x01");
  EXPECT_THROW(read_tensor(bad_magic), Error);
  std::ostringstream os;
  write_tensor(os, Tensor({4}));
  std::istringstream truncated(os.str().substr(0, 20));
  EXPECT_THROW(read_tensor(truncated), Error);
  EXPECT_THROW(load_tensor("/nonexistent/dir/t.ltns"), Error);
}

}  // namespace
}  // namespace lambdanet
