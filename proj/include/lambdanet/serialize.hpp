// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "lambdanet/tensor.hpp"

namespace lambdanet {

// Binary tensor files, little-endian:
//   "LTNS" | u8 version (1) | u8 dtype (0 = f64, 1 = f32) | u8 rank |
//   u64 extents[rank] | row-major payload

inline constexpr std::uint8_t kTensorFormatVersion = 1;

using AnyTensor = std::variant<Tensor, TensorF>;

template <class T>
void write_tensor(std::ostream& os, const BasicTensor<T>& t);
AnyTensor read_tensor(std::istream& is);

template <class T>
void save_tensor(const std::filesystem::path& path, const BasicTensor<T>& t);
AnyTensor load_tensor(const std::filesystem::path& path);

/// Reads either dtype and widens to reference precision.
Tensor load_tensor_f64(const std::filesystem::path& path);

}  // namespace lambdanet
