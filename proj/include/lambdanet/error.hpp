// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lambdanet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extents disagree between operands, or a tensor has the wrong rank.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed contraction string.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters, geometry or mask.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lambdanet
