// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lambdanet/contract.hpp"
#include "lambdanet/cost.hpp"
#include "lambdanet/reference.hpp"
#include "test_util.hpp"

namespace lambdanet {
namespace {

TEST(Contract, MatmulHandValues) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {5, 6, 7, 8});
  EXPECT_EQ(contract("ij,jk->ik", a, b), Tensor({2, 2}, {19, 22, 43, 50}));
  EXPECT_EQ(contract("ij->ji", a), Tensor({2, 2}, {1, 3, 2, 4}));
  EXPECT_EQ(contract("ij->", a), Tensor({}, {10.0}));
  EXPECT_EQ(contract("i,j->ij", Tensor({2}, {1, 2}), Tensor({2}, {3, 4})), Tensor({2, 2}, {3, 4, 6, 8}));
}

TEST(Contract, ParseAndSummedLabels) {
  const auto s = ContractionSpec::parse("bhnk, bnkv -> bnhv");
  EXPECT_EQ(s.inputs, (std::vector<std::string>{"bhnk", "bnkv"}));
  EXPECT_EQ(s.output, "bnhv");
  EXPECT_EQ(s.summed_labels(), "k");
  EXPECT_EQ(s.str(), "bhnk,bnkv->bnhv");
}

TEST(Contract, Errors) {
  Tensor a({2, 3}), b({4, 2});
  EXPECT_THROW(contract("ij,jk->ik", a, b), ShapeError);
  EXPECT_THROW(contract("ijk,jk->ik", a, b), ShapeError);
  EXPECT_THROW(ContractionSpec::parse("ij,jk"), SpecError);
  EXPECT_THROW(ContractionSpec::parse("ii->i"), SpecError);
  EXPECT_THROW(ContractionSpec::parse("ij->iz"), SpecError);
  EXPECT_THROW(ContractionSpec::parse("i1->i"), SpecError);
}

// The naive odometer einsum is the oracle; both engine paths must match it.
TEST(Contract, MatchesNaiveOracle) {
  const std::vector<std::pair<std::string, std::vector<Shape>>> cases = {
      {"bmk,bmv->bkv", {{2, 3, 4}, {2, 3, 2}}},
      {"nmk,bmv->bnkv", {{3, 4, 2}, {2, 4, 3}}},
      {"bhnk,bkv->bnhv", {{2, 3, 4, 2}, {2, 2, 3}}},
      {"bhnk,bnkv->bnhv", {{2, 2, 3, 4}, {2, 3, 4, 2}}},
      {"bnd,dk->bnk", {{2, 3, 4}, {4, 5}}},
      {"abc,cd,de->abe", {{2, 2, 3}, {3, 2}, {2, 4}}},
      {"ij,ij->", {{3, 4}, {3, 4}}},
      {"ijk->kji", {{2, 3, 4}}},
  };
  std::uint64_t seed = 1;
  for (const auto& [spec, shapes] : cases) {
    std::vector<Tensor> ops;
    for (const auto& s : shapes) ops.push_back(testing::randn(s, seed++));
    std::vector<const Tensor*> ptrs;
    for (const auto& t : ops) ptrs.push_back(&t);
    const auto expected = reference::einsum(spec, ptrs);
    for (const auto path : {ContractPath::kAuto, ContractPath::kGeneric}) {
      const auto got = contract<double>(spec, std::span<const Tensor* const>(ptrs), path);
      ASSERT_EQ(got.shape(), expected.shape()) << spec;
      EXPECT_LE(max_abs_diff(got, expected), 1e-12) << spec;
    }
  }
}

TEST(Contract, SpecializedKernelsAreBitIdenticalToGeneric) {
  ASSERT_FALSE(specialized_specs().empty());
  for (const auto& spec : specialized_specs()) {
    EXPECT_TRUE(has_specialized_kernel(spec));
    const auto parsed = ContractionSpec::parse(spec);
    std::map<char, std::size_t> extent;
    std::size_t next = 2;
    std::vector<Tensor> ops;
    for (const auto& in : parsed.inputs) {
      Shape s;
      for (char c : in) {
        if (!extent.count(c)) extent[c] = next++ % 4 + 2;
        s.push_back(extent[c]);
      }
      ops.push_back(testing::randn(s, next));
    }
    std::vector<const Tensor*> ptrs;
    for (const auto& t : ops) ptrs.push_back(&t);
    const std::span<const Tensor* const> view(ptrs);
    EXPECT_EQ(contract<double>(spec, view, ContractPath::kAuto), contract<double>(spec, view, ContractPath::kGeneric))
        << spec;
  }
}

TEST(Contract, MultiplyCounterMatchesFormula) {
  const auto a = testing::randn({2, 3, 4}, 1), b = testing::randn({2, 3, 5}, 2);
  cost::Counter counter;
  {
    cost::Term term(cost::term::kContent);
    contract("bmk,bmv->bkv", a, b);
  }
  // One multiply per (b, m, k, v).
  EXPECT_EQ(counter.get(cost::term::kContent), 2u * 3 * 4 * 5);
  const Shape shapes[] = {a.shape(), b.shape()};
  EXPECT_EQ(contraction_multiplies(ContractionSpec::parse("bmk,bmv->bkv"), shapes), 120u);
  const Shape three[] = {{2, 2}, {2, 3}, {3, 4}};
  EXPECT_EQ(contraction_multiplies(ContractionSpec::parse("ij,jk,kl->il"), three), 2u * 2 * 3 * 4 * 2);
}

TEST(Contract, FloatPath) {
  const auto a = testing::randn({3, 4}, 1), b = testing::randn({4, 2}, 2);
  const auto f = contract("ij,jk->ik", a.cast<float>(), b.cast<float>());
  EXPECT_LE(max_abs_diff(f.cast<double>(), contract("ij,jk->ik", a, b)), 1e-5);
}

}  // namespace
}  // namespace lambdanet
