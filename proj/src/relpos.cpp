// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/relpos.hpp"

#include <charconv>
#include <cstdlib>

namespace lambdanet {
namespace {

std::size_t parse_extent(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value == 0) {
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::size_t> parse_dims(std::string_view text, std::string_view what) {
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (true) {
    const auto x = text.find('x', start);
    dims.push_back(parse_extent(text.substr(start, x == std::string_view::npos ? x : x - start), what));
    if (x == std::string_view::npos) break;
    start = x + 1;
  }
  return dims;
}

long wrap(long value, long n) {
  const long r = value % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Geometry Geometry::seq(std::size_t n) {
  if (n == 0) throw ConfigError("sequence length must be positive");
  return Geometry{Kind::kSeq, {n}};
}

Geometry Geometry::grid(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ConfigError("grid extents must be positive");
  return Geometry{Kind::kGrid, {height, width}};
}

Geometry Geometry::parse(std::string_view text) {
  if (text.starts_with("seq:")) {
    auto dims = parse_dims(text.substr(4), "sequence length");
    if (dims.size() != 1) throw ConfigError("seq geometry takes one extent: " + std::string(text));
    return seq(dims[0]);
  }
  if (text.starts_with("grid:")) {
    auto dims = parse_dims(text.substr(5), "grid extent");
    if (dims.size() != 2) throw ConfigError("grid geometry takes HxW: " + std::string(text));
    return grid(dims[0], dims[1]);
  }
  throw ConfigError("geometry must be seq:N or grid:HxW, got '" + std::string(text) + "'");
}

std::size_t Geometry::size() const noexcept { return num_elements(dims); }

std::string Geometry::str() const {
  if (kind == Kind::kSeq) return "seq:" + std::to_string(dims[0]);
  return "grid:" + std::to_string(dims[0]) + "x" + std::to_string(dims[1]);
}

std::vector<std::size_t> Geometry::coords(std::size_t flat) const {
  std::vector<std::size_t> c(dims.size());
  for (std::size_t a = dims.size(); a-- > 0;) {
    c[a] = flat % dims[a];
    flat /= dims[a];
  }
  return c;
}

Boundary parse_boundary(std::string_view text) {
  if (text == "clamped") return Boundary::kClamped;
  if (text == "circular") return Boundary::kCircular;
  throw ConfigError("boundary must be clamped or circular, got '" + std::string(text) + "'");
}

std::string to_string(Boundary b) { return b == Boundary::kClamped ? "clamped" : "circular"; }

Scope parse_scope(std::string_view text) { return parse_dims(text, "scope"); }

std::string scope_str(const Scope& scope) {
  std::string s;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(scope[i]);
  }
  return s;
}

RelIndexMap RelIndexMap::build(const Geometry& geometry, const Geometry& context, Boundary boundary,
                               const std::optional<Scope>& scope) {
  if (!(geometry == context)) {
    throw ConfigError("context geometry " + context.str() + " must equal query geometry " +
                      geometry.str());
  }
  const std::size_t axes = geometry.axes();
  if (scope) {
    if (scope->size() == 1 && axes == 2) {
      throw ConfigError("grid geometry needs a 2-d scope such as 3x3");
    }
    if (scope->size() != axes) throw ConfigError("scope rank does not match geometry");
    for (std::size_t a = 0; a < axes; ++a) {
      const std::size_t s = (*scope)[a];
      const std::size_t extent = geometry.dims[a];
      if (s % 2 == 0) throw ConfigError("scope extent " + std::to_string(s) + " must be odd");
      const std::size_t limit = boundary == Boundary::kCircular ? extent : 2 * extent - 1;
      if (s > limit) {
        throw ConfigError("scope extent " + std::to_string(s) + " exceeds " +
                          std::to_string(limit) + " for " + to_string(boundary) + " axis of " +
                          std::to_string(extent));
      }
    }
  }

  RelIndexMap map;
  map.geometry_ = geometry;
  map.boundary_ = boundary;
  map.scope_ = scope;
  map.n_ = geometry.size();
  map.m_ = context.size();
  map.bucket_extents_.resize(axes);
  for (std::size_t a = 0; a < axes; ++a) {
    const std::size_t extent = geometry.dims[a];
    map.bucket_extents_[a] = scope ? (*scope)[a]
                             : boundary == Boundary::kClamped ? 2 * extent - 1
                                                              : extent;
  }
  map.buckets_ = num_elements(map.bucket_extents_);

  return map;
}

int RelIndexMap::bucket(std::size_t n, std::size_t m) const {
  const std::size_t axes = geometry_.axes();
  long delta[2] = {0, 0};
  std::size_t qn = n, cm = m;
  for (std::size_t a = axes; a-- > 0;) {
    const std::size_t extent = geometry_.dims[a];
    delta[a] = static_cast<long>(cm % extent) - static_cast<long>(qn % extent);
    qn /= extent;
    cm /= extent;
  }
  return bucket_for_offset(std::span<const long>(delta, axes));
}

std::span<const int> RelIndexMap::table() const {
  std::call_once(table_->once, [this] {
    auto& t = table_->data;
    t.resize(n_ * m_);
    for (std::size_t n = 0; n < n_; ++n) {
      for (std::size_t m = 0; m < m_; ++m) t[n * m_ + m] = bucket(n, m);
    }
  });
  return table_->data;
}

std::vector<std::size_t> RelIndexMap::window() const {
  if (scope_) return *scope_;
  if (boundary_ == Boundary::kCircular) {
    throw ConfigError("the convolution path needs an explicit scope in circular mode");
  }
  return bucket_extents_;
}

int RelIndexMap::bucket_for_offset(std::span<const long> displacement) const {
  int flat = 0;
  for (std::size_t a = 0; a < bucket_extents_.size(); ++a) {
    const long extent = static_cast<long>(geometry_.dims[a]);
    long d = displacement[a];
    long index;
    if (boundary_ == Boundary::kCircular) {
      d = wrap(d, extent);
      if (scope_) {
        if (d > extent / 2) d -= extent;  // signed displacement around the ring
        const long half = static_cast<long>((*scope_)[a] - 1) / 2;
        if (std::labs(d) > half) return kOutOfScope;
        index = d + half;
      } else {
        index = d;
      }
    } else {
      const long half = static_cast<long>(bucket_extents_[a] - 1) / 2;
      if (std::labs(d) > half) return kOutOfScope;
      index = d + half;
    }
    flat = flat * static_cast<int>(bucket_extents_[a]) + static_cast<int>(index);
  }
  return flat;
}

Tensor RelIndexMap::to_tensor() const {
  Tensor t({n_, m_});
  const auto buckets = table();
  for (std::size_t i = 0; i < buckets.size(); ++i) t[i] = static_cast<double>(buckets[i]);
  return t;
}

template <class T>
BasicTensor<T> expand_embeddings(const RelIndexMap& map, const BasicTensor<T>& table) {
  if (table.rank() < 2) throw ShapeError("embedding table must be [r, k] or [r, k, u]");
  if (table.extent(0) != map.num_buckets()) {
    throw ShapeError("embedding table has " + std::to_string(table.extent(0)) +
                     " rows but the index map uses " + std::to_string(map.num_buckets()) +
                     " buckets");
  }
  Shape shape{map.num_queries(), map.num_context()};
  shape.insert(shape.end(), table.shape().begin() + 1, table.shape().end());
  BasicTensor<T> out(shape);
  const std::size_t row = table.size() / table.extent(0);
  const auto buckets = map.table();
  for (std::size_t p = 0; p < buckets.size(); ++p) {
    if (buckets[p] == kOutOfScope) continue;
    const T* src = table.raw() + static_cast<std::size_t>(buckets[p]) * row;
    std::copy(src, src + row, out.raw() + p * row);
  }
  return out;
}

template BasicTensor<double> expand_embeddings(const RelIndexMap&, const BasicTensor<double>&);
template BasicTensor<float> expand_embeddings(const RelIndexMap&, const BasicTensor<float>&);

Tensor scatter_embedding_grad(const RelIndexMap& map, const Tensor& grad_embeddings) {
  if (grad_embeddings.rank() < 3 || grad_embeddings.extent(0) != map.num_queries() ||
      grad_embeddings.extent(1) != map.num_context()) {
    throw ShapeError("embedding gradient shape " + to_string(grad_embeddings.shape()) +
                     " does not match the index map");
  }
  Shape shape{map.num_buckets()};
  shape.insert(shape.end(), grad_embeddings.shape().begin() + 2, grad_embeddings.shape().end());
  Tensor out(shape);
  const std::size_t row = out.size() / out.extent(0);
  const auto buckets = map.table();
  for (std::size_t p = 0; p < buckets.size(); ++p) {
    if (buckets[p] == kOutOfScope) continue;
    double* dst = out.raw() + static_cast<std::size_t>(buckets[p]) * row;
    const double* src = grad_embeddings.raw() + p * row;
    for (std::size_t i = 0; i < row; ++i) dst[i] += src[i];
  }
  return out;
}

Tensor build_causal_mask(std::size_t n) {
  if (n == 0) throw ConfigError("causal mask needs n >= 1");
  Tensor mask({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) mask[i * n + j] = 1.0;
  }
  return mask;
}

}  // namespace lambdanet
