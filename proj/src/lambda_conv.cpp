// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/lambda_conv.hpp"

#include "lambdanet/cost.hpp"

namespace lambdanet {
namespace {

// Flattened padded layout of the spatial axes.
struct PaddedLayout {
  std::size_t positions = 0;         // n
  std::size_t padded_positions = 0;  // product of padded extents
  std::vector<std::size_t> base;     // padded flat index of each output position's center
  std::vector<long> tap_offset;      // flat padded displacement per tap
  std::vector<std::size_t> tap_bucket;
  // padded flat index -> source flat position (or npos for zero padding)
  std::vector<std::size_t> source;
};

constexpr std::size_t kPadding = static_cast<std::size_t>(-1);

PaddedLayout make_layout(const RelIndexMap& map) {
  const Geometry& g = map.geometry();
  const auto window = map.window();
  const std::size_t axes = g.axes();
  std::vector<std::size_t> half(axes), padded(axes);
  for (std::size_t a = 0; a < axes; ++a) {
    half[a] = (window[a] - 1) / 2;
    padded[a] = g.dims[a] + 2 * half[a];
  }

  PaddedLayout L;
  L.positions = g.size();
  L.padded_positions = num_elements(padded);

  L.base.resize(L.positions);
  for (std::size_t n = 0; n < L.positions; ++n) {
    const auto c = g.coords(n);
    std::size_t flat = 0;
    for (std::size_t a = 0; a < axes; ++a) flat = flat * padded[a] + c[a] + half[a];
    L.base[n] = flat;
  }

  const std::size_t taps = num_elements(window);
  std::vector<long> delta(axes);
  for (std::size_t t = 0; t < taps; ++t) {
    std::size_t rem = t;
    for (std::size_t a = axes; a-- > 0;) {
      delta[a] = static_cast<long>(rem % window[a]) - static_cast<long>(half[a]);
      rem /= window[a];
    }
    long off = 0;
    for (std::size_t a = 0; a < axes; ++a) off = off * static_cast<long>(padded[a]) + delta[a];
    L.tap_offset.push_back(off);
    const int bucket = map.bucket_for_offset(delta);
    if (bucket == kOutOfScope) throw ConfigError("tap outside the embedding window");
    L.tap_bucket.push_back(static_cast<std::size_t>(bucket));
  }

  const bool circular = map.boundary() == Boundary::kCircular;
  L.source.assign(L.padded_positions, kPadding);
  std::vector<std::size_t> pc(axes);
  for (std::size_t p = 0; p < L.padded_positions; ++p) {
    std::size_t rem = p;
    for (std::size_t a = axes; a-- > 0;) {
      pc[a] = rem % padded[a];
      rem /= padded[a];
    }
    std::size_t flat = 0;
    bool inside = true;
    for (std::size_t a = 0; a < axes; ++a) {
      long c = static_cast<long>(pc[a]) - static_cast<long>(half[a]);
      const long extent = static_cast<long>(g.dims[a]);
      if (circular) {
        c = ((c % extent) + extent) % extent;
      } else if (c < 0 || c >= extent) {
        inside = false;
        break;
      }
      flat = flat * g.dims[a] + static_cast<std::size_t>(c);
    }
    if (inside) L.source[p] = flat;
  }
  return L;
}

struct ValueDims {
  std::size_t b, n, v, u;
};

template <class T>
ValueDims check_inputs(const BasicTensor<T>& table, const BasicTensor<T>& values,
                       const RelIndexMap& map) {
  if (values.rank() != 3 && values.rank() != 4) {
    throw ShapeError("values must be [b, n, v] or [b, n, v, u], got " + to_string(values.shape()));
  }
  ValueDims d{values.extent(0), values.extent(1), values.extent(2),
              values.rank() == 4 ? values.extent(3) : 1};
  if (d.n != map.num_queries()) {
    throw ShapeError("values cover " + std::to_string(d.n) + " positions but the geometry has " +
                     std::to_string(map.num_queries()));
  }
  const std::size_t table_u = table.rank() == 3 ? table.extent(2) : 1;
  if ((table.rank() != 2 && table.rank() != 3) || table_u != d.u) {
    throw ShapeError("embedding table " + to_string(table.shape()) +
                     " does not match values " + to_string(values.shape()));
  }
  if (table.extent(0) != map.num_buckets()) {
    throw ShapeError("embedding table rows do not match the index map buckets");
  }
  return d;
}

// [b, padded, v*u], zero (clamped) or wrapped (circular) outside the geometry.
template <class T>
BasicTensor<T> pad_values(const BasicTensor<T>& values, const PaddedLayout& L, const ValueDims& d) {
  const std::size_t ch = d.v * d.u;
  BasicTensor<T> out({d.b, L.padded_positions, ch});
  for (std::size_t b = 0; b < d.b; ++b) {
    for (std::size_t p = 0; p < L.padded_positions; ++p) {
      if (L.source[p] == kPadding) continue;
      const T* src = values.raw() + (b * d.n + L.source[p]) * ch;
      std::copy(src, src + ch, out.raw() + (b * L.padded_positions + p) * ch);
    }
  }
  return out;
}

}  // namespace

template <class T>
BasicTensor<T> position_lambdas_conv(const BasicTensor<T>& table, const BasicTensor<T>& values,
                                     const RelIndexMap& map) {
  const auto d = check_inputs(table, values, map);
  const auto L = make_layout(map);
  const auto padded = pad_values(values, L, d);
  const std::size_t K = table.extent(1);
  const std::size_t taps = L.tap_offset.size();
  const std::size_t ch = d.v * d.u;
  cost::record(static_cast<std::uint64_t>(d.b) * d.n * taps * K * d.v * d.u);

  // Output of the (n+1)-d convolution: [b, n, v, k].
  BasicTensor<T> out_nvk({d.b, d.n, d.v, K});
  for (std::size_t b = 0; b < d.b; ++b) {
    const T* vb = padded.raw() + b * L.padded_positions * ch;
    for (std::size_t n = 0; n < d.n; ++n) {
      T* o = out_nvk.raw() + (b * d.n + n) * d.v * K;
      for (std::size_t v = 0; v < d.v; ++v) {
        for (std::size_t k = 0; k < K; ++k) {
          T acc{0};
          for (std::size_t t = 0; t < taps; ++t) {
            const auto p = static_cast<std::size_t>(static_cast<long>(L.base[n]) + L.tap_offset[t]);
            const T* vp = vb + p * ch + v * d.u;
            const T* rp = table.raw() + (L.tap_bucket[t] * K + k) * d.u;
            for (std::size_t u = 0; u < d.u; ++u) acc += rp[u] * vp[u];
          }
          o[v * K + k] = acc;
        }
      }
    }
  }
  return out_nvk.transpose({0, 1, 3, 2});
}

template <class T>
BasicTensor<T> position_lambdas_depthwise(const BasicTensor<T>& table, const BasicTensor<T>& values,
                                          const RelIndexMap& map) {
  const auto d = check_inputs(table, values, map);
  if (d.u != 1) throw ConfigError("the depthwise lambda convolution requires u == 1");
  const auto L = make_layout(map);
  const auto padded = pad_values(values, L, d);
  const std::size_t K = table.extent(1);
  const std::size_t taps = L.tap_offset.size();
  const std::size_t C = d.v;
  cost::record(static_cast<std::uint64_t>(d.b) * d.n * taps * K * C);

  // Depthwise kernel [taps, C, K]: the embedding row for each tap, tiled over
  // the value channels.
  BasicTensor<T> kernel({taps, C, K});
  for (std::size_t t = 0; t < taps; ++t) {
    const T* row = table.raw() + L.tap_bucket[t] * K;
    for (std::size_t c = 0; c < C; ++c) std::copy(row, row + K, kernel.raw() + (t * C + c) * K);
  }

  // Output channel c * K + j, i.e. [b, n, v, k].
  BasicTensor<T> out_nvk({d.b, d.n, C, K});
  for (std::size_t b = 0; b < d.b; ++b) {
    const T* vb = padded.raw() + b * L.padded_positions * C;
    for (std::size_t n = 0; n < d.n; ++n) {
      T* o = out_nvk.raw() + (b * d.n + n) * C * K;
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < K; ++j) {
          T acc{0};
          for (std::size_t t = 0; t < taps; ++t) {
            const auto p = static_cast<std::size_t>(static_cast<long>(L.base[n]) + L.tap_offset[t]);
            acc += vb[p * C + c] * kernel[(t * C + c) * K + j];
          }
          o[c * K + j] = acc;
        }
      }
    }
  }
  return out_nvk.transpose({0, 1, 3, 2});
}

namespace {

// Folds a gradient over the padded layout back onto the geometry.
Tensor unpad_grad(const Tensor& grad_padded, const PaddedLayout& L, const ValueDims& d,
                  const Shape& value_shape) {
  const std::size_t ch = d.v * d.u;
  Tensor out(value_shape);
  for (std::size_t b = 0; b < d.b; ++b) {
    for (std::size_t p = 0; p < L.padded_positions; ++p) {
      if (L.source[p] == kPadding) continue;
      const double* src = grad_padded.raw() + (b * L.padded_positions + p) * ch;
      double* dst = out.raw() + (b * d.n + L.source[p]) * ch;
      for (std::size_t c = 0; c < ch; ++c) dst[c] += src[c];
    }
  }
  return out;
}

}  // namespace

ConvGrads position_lambdas_conv_backward(const Tensor& table, const Tensor& values,
                                         const RelIndexMap& map, const Tensor& grad) {
  const auto d = check_inputs(table, values, map);
  const auto L = make_layout(map);
  const auto padded = pad_values(values, L, d);
  const std::size_t K = table.extent(1);
  const std::size_t taps = L.tap_offset.size();
  const std::size_t ch = d.v * d.u;
  if (grad.shape() != Shape{d.b, d.n, K, d.v}) throw ShapeError("position lambda gradient shape");

  Tensor d_table(table.shape());
  Tensor d_padded({d.b, L.padded_positions, ch});
  for (std::size_t b = 0; b < d.b; ++b) {
    for (std::size_t n = 0; n < d.n; ++n) {
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t v = 0; v < d.v; ++v) {
          const double g = grad[((b * d.n + n) * K + k) * d.v + v];
          for (std::size_t t = 0; t < taps; ++t) {
            const auto p = static_cast<std::size_t>(static_cast<long>(L.base[n]) + L.tap_offset[t]);
            const std::size_t vi = (b * L.padded_positions + p) * ch + v * d.u;
            const std::size_t ri = (L.tap_bucket[t] * K + k) * d.u;
            for (std::size_t u = 0; u < d.u; ++u) {
              d_table[ri + u] += g * padded[vi + u];
              d_padded[vi + u] += g * table[ri + u];
            }
          }
        }
      }
    }
  }
  return {std::move(d_table), unpad_grad(d_padded, L, d, values.shape())};
}

ConvGrads position_lambdas_depthwise_backward(const Tensor& table, const Tensor& values,
                                              const RelIndexMap& map, const Tensor& grad) {
  const auto d = check_inputs(table, values, map);
  if (d.u != 1) throw ConfigError("the depthwise lambda convolution requires u == 1");
  const auto L = make_layout(map);
  const auto padded = pad_values(values, L, d);
  const std::size_t K = table.extent(1);
  const std::size_t taps = L.tap_offset.size();
  const std::size_t C = d.v;
  if (grad.shape() != Shape{d.b, d.n, K, C}) throw ShapeError("position lambda gradient shape");

  // Gradient of the tiled kernel [taps, C, K], then summed over the tiles.
  Tensor d_kernel({taps, C, K});
  Tensor d_padded({d.b, L.padded_positions, C});
  for (std::size_t b = 0; b < d.b; ++b) {
    for (std::size_t n = 0; n < d.n; ++n) {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < K; ++j) {
          const double g = grad[((b * d.n + n) * K + j) * C + c];
          for (std::size_t t = 0; t < taps; ++t) {
            const auto p = static_cast<std::size_t>(static_cast<long>(L.base[n]) + L.tap_offset[t]);
            const std::size_t vi = (b * L.padded_positions + p) * C + c;
            d_kernel[(t * C + c) * K + j] += g * padded[vi];
            d_padded[vi] += g * table[L.tap_bucket[t] * K + j];
          }
        }
      }
    }
  }
  Tensor d_table(table.shape());
  for (std::size_t t = 0; t < taps; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t j = 0; j < K; ++j) d_table[L.tap_bucket[t] * K + j] += d_kernel[(t * C + c) * K + j];
    }
  }
  return {std::move(d_table), unpad_grad(d_padded, L, d, values.shape())};
}

template BasicTensor<double> position_lambdas_conv(const BasicTensor<double>&,
                                                   const BasicTensor<double>&, const RelIndexMap&);
template BasicTensor<float> position_lambdas_conv(const BasicTensor<float>&, const BasicTensor<float>&,
                                                  const RelIndexMap&);
template BasicTensor<double> position_lambdas_depthwise(const BasicTensor<double>&,
                                                        const BasicTensor<double>&,
                                                        const RelIndexMap&);
template BasicTensor<float> position_lambdas_depthwise(const BasicTensor<float>&,
                                                       const BasicTensor<float>&, const RelIndexMap&);

}  // namespace lambdanet
