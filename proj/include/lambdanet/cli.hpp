// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace lambdanet::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Current report schema, written as the top-level "schema" field.
inline constexpr int kSchemaVersion = 1;

/// Runs the `lambdanet` command line. Reports go to `out` (or the --out
/// file), diagnostics and usage text to `err`. Returns the process exit code:
/// 0 when everything passed, 1 on a failed property, gradient check or
/// diverged training run, 2 on a usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lambdanet::cli
