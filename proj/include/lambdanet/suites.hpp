// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lambdanet/lambda_layer.hpp"
#include "lambdanet/rng.hpp"

namespace lambdanet {

// Property suites behind `lambdanet verify`. Each property runs a batch of
// seeded cases and keeps the worst error it saw.

struct PropertyResult {
  std::string name;
  bool passed = true;
  /// Largest observed error; 0 for properties that compare bits.
  double worst_error = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
  /// First failing case, or a short description of what was covered.
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;

  bool passed() const;
  /// Names of failing properties, "suite/property".
  std::vector<std::string> failures() const;
};

struct SuiteOptions {
  std::uint64_t seed = kDefaultSeed;
  /// Restricts the equivalence suite to one implementation against einsum.
  std::optional<PositionImpl> impl;
};

/// oracle, equivalence, masked, gradients, equivariance, relpos, contract,
/// complexity, collapses, memory, toy.
std::vector<std::string> suite_names();

/// Throws ConfigError for unknown names.
SuiteReport run_suite(std::string_view name, const SuiteOptions& options = {});

}  // namespace lambdanet
