// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace lambdanet {
namespace {

constexpr std::array<char, 4> kMagic = {'L', 'T', 'N', 'S'};

template <class U>
void put_le(std::ostream& os, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  os.write(bytes.data(), bytes.size());
}

template <class U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes;
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw Error("truncated tensor stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

template <class T>
using Bits = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;

template <class T>
BasicTensor<T> read_payload(std::istream& is, Shape shape) {
  BasicTensor<T> t(std::move(shape));
  for (auto& x : t.data()) x = std::bit_cast<T>(get_le<Bits<T>>(is));
  return t;
}

}  // namespace

template <class T>
void write_tensor(std::ostream& os, const BasicTensor<T>& t) {
  if (t.rank() > 255) throw ShapeError("rank exceeds the format limit of 255");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(os, kTensorFormatVersion);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of<T>()));
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  for (auto e : t.shape()) put_le<std::uint64_t>(os, e);
  for (T x : t.data()) put_le<Bits<T>>(os, std::bit_cast<Bits<T>>(x));
  if (!os) throw Error("failed writing tensor stream");
}

AnyTensor read_tensor(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw Error("not a tensor stream (bad magic)");
  const auto version = get_le<std::uint8_t>(is);
  if (version != kTensorFormatVersion) {
    throw Error("unsupported tensor format version " + std::to_string(version));
  }
  const auto dtype = get_le<std::uint8_t>(is);
  const auto rank = get_le<std::uint8_t>(is);
  Shape shape(rank);
  for (auto& e : shape) e = static_cast<std::size_t>(get_le<std::uint64_t>(is));
  switch (static_cast<DType>(dtype)) {
    case DType::kF64:
      return read_payload<double>(is, std::move(shape));
    case DType::kF32:
      return read_payload<float>(is, std::move(shape));
  }
  throw Error("unknown dtype code " + std::to_string(dtype));
}

template <class T>
void save_tensor(const std::filesystem::path& path, const BasicTensor<T>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

AnyTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_tensor(is);
}

Tensor load_tensor_f64(const std::filesystem::path& path) {
  auto any = load_tensor(path);
  if (auto* f = std::get_if<TensorF>(&any)) return f->cast<double>();
  return std::get<Tensor>(std::move(any));
}

template void write_tensor(std::ostream&, const BasicTensor<double>&);
template void write_tensor(std::ostream&, const BasicTensor<float>&);
template void save_tensor(const std::filesystem::path&, const BasicTensor<double>&);
template void save_tensor(const std::filesystem::path&, const BasicTensor<float>&);

}  // namespace lambdanet
