// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/mutation.hpp"

#include <atomic>

#include "lambdanet/error.hpp"

namespace lambdanet::mutation {
namespace {

std::atomic<Mutation> g_active{Mutation::kNone};

}  // namespace

Mutation parse(std::string_view text) {
  if (text == "none") return Mutation::kNone;
  if (text == "content-sign") return Mutation::kContentSign;
  throw ConfigError("unknown mutation '" + std::string(text) + "'");
}

std::string to_string(Mutation m) {
  return m == Mutation::kContentSign ? "content-sign" : "none";
}

void set(Mutation m) noexcept { g_active.store(m); }

Mutation active() noexcept { return g_active.load(); }

}  // namespace lambdanet::mutation
