// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace lambdanet::mutation {

// Deliberate faults for checking that the verify suites catch real bugs.
// Process-wide; off unless a caller turns one on.
enum class Mutation { kNone, kContentSign };

/// "none" or "content-sign".
Mutation parse(std::string_view text);
std::string to_string(Mutation m);

void set(Mutation m) noexcept;
Mutation active() noexcept;

/// Restores the previous mutation on destruction.
class Guard {
 public:
  explicit Guard(Mutation m) noexcept : previous_(active()) { set(m); }
  ~Guard() { set(previous_); }
  Guard(const Guard&) = delete;
  Guard& operator=(const Guard&) = delete;

 private:
  Mutation previous_;
};

}  // namespace lambdanet::mutation
