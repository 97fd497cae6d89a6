// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/variants.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lambdanet/contract.hpp"
#include "lambdanet/cost.hpp"
#include "lambdanet/ops.hpp"
#include "lambdanet/rng.hpp"
#include "layer_internal.hpp"

namespace lambdanet {

void MaskSpec::validate(std::size_t n, std::size_t m) const {
  if (mask.shape() != Shape{n, m}) {
    throw ConfigError("mask must be " + to_string(Shape{n, m}) + ", got " + to_string(mask.shape()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = mask[i * m + j];
      if (x != 0.0 && x != 1.0) throw ConfigError("mask entries must be 0 or 1");
      any = any || x == 1.0;
    }
    if (!any) throw ConfigError("mask row " + std::to_string(i) + " has no visible context");
  }
}

template <class T>
BasicTensor<T> masked_content_lambdas(const BasicTensor<T>& keys, const BasicTensor<T>& values,
                                      const Tensor& mask, KeyNorm mode) {
  if (keys.rank() != 3 || values.rank() != 3 || keys.extent(0) != values.extent(0) ||
      keys.extent(1) != values.extent(1)) {
    throw ShapeError("masked content lambdas need keys [b, m, k] and values [b, m, v]");
  }
  const std::size_t B = keys.extent(0), M = keys.extent(1), K = keys.extent(2), V = values.extent(2);
  if (mask.rank() != 2 || mask.extent(1) != M) throw ShapeError("mask does not match the context");
  const std::size_t N = mask.extent(0);
  cost::Term term(cost::term::kContent);
  cost::record(static_cast<std::uint64_t>(B) * N * M * K * V);

  BasicTensor<T> out({B, N, K, V});
  std::vector<T> w;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t k = 0; k < K; ++k) {
        detail::masked_key_weights(keys, b, k, mask.raw() + n * M, mode, w);
        T* o = out.raw() + ((b * N + n) * K + k) * V;
        for (std::size_t m = 0; m < M; ++m) {
          const T* vr = values.raw() + (b * M + m) * V;
          for (std::size_t v = 0; v < V; ++v) o[v] += w[m] * vr[v];
        }
      }
    }
  }
  return out;
}

template <class T>
BasicTensor<T> masked_lambda_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                     const BasicLambdaParams<T>& params, const LambdaConfig& config,
                                     const MaskSpec& mask) {
  config.validate();
  if (config.u != 1) throw ConfigError("the masked layer requires u == 1");
  if (config.impl != PositionImpl::kEinsum) throw ConfigError("the masked layer uses the einsum path");
  detail::check_inputs(x.shape(), context.shape(), config);
  mask.validate(x.extent(1), context.extent(1));
  const auto qkv = project_qkv(x, context, params, config);

  BasicTensor<T> lc, lp;
  if (config.uses_content()) lc = masked_content_lambdas(qkv.keys, qkv.values, mask.mask, config.key_norm);
  if (config.uses_position()) {
    const auto map = RelIndexMap::build(config.position);
    BasicTensor<T> embeddings;
    {
      cost::Term term(cost::term::kMask);
      embeddings = contract<T>("nmk,nm->nmk", expand_embeddings(map, params.r), mask.mask.cast<T>());
    }
    lp = position_lambdas_einsum(embeddings, qkv.values);
  }

  cost::Term term(cost::term::kApply);
  const std::size_t b = x.extent(0), n = x.extent(1), h = config.h, v = config.v();
  BasicTensor<T> y;
  if (config.uses_content()) y = contract<T>("bhnk,bnkv->bnhv", qkv.queries, lc);
  if (config.uses_position()) {
    auto yp = contract<T>("bhnk,bnkv->bnhv", qkv.queries, lp);
    y = config.uses_content() ? add(y, yp) : std::move(yp);
  }
  return y.reshape({b, n, h * v});
}

namespace detail {

template <class T>
BasicTensor<T> multihead_embeddings(const RelIndexMap& map, const BasicTensor<T>& r) {
  const std::size_t h = r.extent(0), rows = r.extent(1), k = r.extent(2);
  BasicTensor<T> out({h, map.num_queries(), map.num_context(), k});
  for (std::size_t head = 0; head < h; ++head) {
    BasicTensor<T> table({rows, k}, std::span<const T>(r.raw() + head * rows * k, rows * k));
    const auto e = expand_embeddings(map, table);
    std::copy(e.raw(), e.raw() + e.size(), out.raw() + head * e.size());
  }
  return out;
}

template Tensor multihead_embeddings(const RelIndexMap&, const Tensor&);
template TensorF multihead_embeddings(const RelIndexMap&, const TensorF&);

}  // namespace detail

LambdaParams init_multihead_params(const LambdaConfig& config, std::uint64_t seed) {
  config.validate();
  const double d = static_cast<double>(config.d_in);
  const std::size_t h = config.h, k = config.k, v = config.v();
  auto draw = [&](Shape shape, std::uint64_t substream, double stddev) {
    CounterRng rng(seed, Stream::kParams, substream);
    return random_normal(std::move(shape), rng, stddev);
  };
  LambdaParams p;
  p.w_q = draw({config.d_in, h * k}, 0, 1.0 / std::sqrt(static_cast<double>(k) * d));
  p.w_k = draw({config.d_in, h * k}, 1, 1.0 / std::sqrt(d));
  p.w_v = draw({config.d_in, h * v}, 2, 1.0 / std::sqrt(d));
  p.r = draw({h, num_buckets(config), k}, 3, 1.0);
  p.q_scale = Tensor::full({h * k}, 1.0);
  p.q_shift = Tensor({h * k});
  p.v_scale = Tensor::full({h * v}, 1.0);
  p.v_shift = Tensor({h * v});
  return p;
}

template <class T>
BasicTensor<T> multihead_lambda_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                        const BasicLambdaParams<T>& params, const LambdaConfig& config) {
  config.validate();
  if (config.u != 1) throw ConfigError("the multi-head layer requires u == 1");
  if (config.impl != PositionImpl::kEinsum) throw ConfigError("the multi-head layer uses the einsum path");
  detail::check_inputs(x.shape(), context.shape(), config);
  const std::size_t b = x.extent(0), n = x.extent(1), m = context.extent(1);
  const std::size_t h = config.h, k = config.k, v = config.v(), d = config.d_in;
  if (x.extent(2) != d || context.extent(2) != d) throw ShapeError("input channels do not match d_in");
  if (params.w_q.shape() != Shape{d, h * k} || params.w_k.shape() != Shape{d, h * k} ||
      params.w_v.shape() != Shape{d, h * v}) {
    throw ShapeError("multi-head projections must be [d, h*k], [d, h*k], [d, h*v]");
  }

  BasicTensor<T> q, keys, values;
  {
    cost::Term term(cost::term::kProjection);
    q = contract<T>("bnd,de->bne", x, params.w_q);
    keys = contract<T>("bnd,de->bne", context, params.w_k);
    values = contract<T>("bnd,de->bne", context, params.w_v);
  }
  if (config.qv_hook) {
    q = add(mul(q, params.q_scale), params.q_shift);
    values = add(mul(values, params.v_scale), params.v_shift);
  }
  q = q.reshape({b, n, h, k}).transpose({0, 2, 1, 3});
  keys = keys.reshape({b, m, h, k}).transpose({0, 2, 1, 3});
  values = values.reshape({b, m, h, v}).transpose({0, 2, 1, 3});

  BasicTensor<T> y;
  if (config.uses_content()) {
    BasicTensor<T> normalized = keys;
    if (config.key_norm == KeyNorm::kSoftmax) normalized = softmax(keys, 2);
    if (config.key_norm == KeyNorm::kL2) normalized = l2_normalize(keys, 2);
    BasicTensor<T> lc;
    {
      cost::Term term(cost::term::kContent);
      lc = contract<T>("bhmk,bhmv->bhkv", normalized, values);
    }
    cost::Term term(cost::term::kApply);
    y = contract<T>("bhnk,bhkv->bnhv", q, lc);
  }
  if (config.uses_position()) {
    const auto map = RelIndexMap::build(config.position);
    if (params.r.rank() != 3 || params.r.extent(0) != h) throw ShapeError("multi-head r must be [h, |r|, k]");
    const auto embeddings = detail::multihead_embeddings(map, params.r);
    BasicTensor<T> lp;
    {
      cost::Term term(cost::term::kPosition);
      lp = contract<T>("hnmk,bhmv->bnhkv", embeddings, values);
    }
    cost::Term term(cost::term::kApply);
    auto yp = contract<T>("bhnk,bnhkv->bnhv", q, lp);
    y = config.uses_content() ? add(y, yp) : std::move(yp);
  }
  return y.reshape({b, n, h * v});
}

template <class T>
BasicTensor<T> intra_depth_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                   const BasicLambdaParams<T>& params, const LambdaConfig& config) {
  return detail::multi_query_forward(x, context, params, config);
}

template <class T>
BasicTensor<T> content_only_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                    const BasicLambdaParams<T>& params, const LambdaConfig& config) {
  LambdaConfig c = config;
  c.interactions = Interactions::kContentOnly;
  return detail::multi_query_forward(x, context, params, c);
}

Variant parse_variant(std::string_view text) {
  if (text == "global") return Variant::kGlobal;
  if (text == "masked") return Variant::kMasked;
  if (text == "multihead") return Variant::kMultihead;
  if (text == "intra-depth") return Variant::kIntraDepth;
  if (text == "content-only") return Variant::kContentOnly;
  throw ConfigError("variant must be global, masked, multihead, intra-depth or content-only, got '" +
                    std::string(text) + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kGlobal: return "global";
    case Variant::kMasked: return "masked";
    case Variant::kMultihead: return "multihead";
    case Variant::kIntraDepth: return "intra-depth";
    case Variant::kContentOnly: return "content-only";
  }
  return "?";
}

LambdaParams init_variant_params(Variant variant, const LambdaConfig& config, std::uint64_t seed) {
  return variant == Variant::kMultihead ? init_multihead_params(config, seed) : init_params(config, seed);
}

template <class T>
BasicTensor<T> variant_forward(Variant variant, const BasicTensor<T>& x, const BasicTensor<T>& context,
                               const BasicLambdaParams<T>& params, const LambdaConfig& config,
                               const MaskSpec* mask) {
  switch (variant) {
    case Variant::kGlobal: return lambda_layer_forward(x, context, params, config);
    case Variant::kMasked:
      if (mask == nullptr) throw ConfigError("the masked variant needs a mask");
      return masked_lambda_forward(x, context, params, config, *mask);
    case Variant::kMultihead: return multihead_lambda_forward(x, context, params, config);
    case Variant::kIntraDepth: return intra_depth_forward(x, context, params, config);
    case Variant::kContentOnly: return content_only_forward(x, context, params, config);
  }
  throw ConfigError("unknown variant");
}

Tensor diagonal_lambda(const Tensor& weights) {
  if (weights.rank() != 2) throw ShapeError("channel weights must be [b, k]");
  const std::size_t b = weights.extent(0), k = weights.extent(1);
  Tensor out({b, k, k});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < k; ++j) out[(i * k + j) * k + j] = weights[i * k + j];
  }
  return out;
}

Tensor scalar_lambdas(const Tensor& weights, std::size_t k) {
  if (weights.rank() != 2) throw ShapeError("position weights must be [b, n]");
  const std::size_t b = weights.extent(0), n = weights.extent(1);
  Tensor out({b, n, k, k});
  for (std::size_t i = 0; i < b * n; ++i) {
    for (std::size_t j = 0; j < k; ++j) out[(i * k + j) * k + j] = weights[i];
  }
  return out;
}

#define LAMBDANET_INSTANTIATE(T)                                                                    \
  template BasicTensor<T> masked_content_lambdas(const BasicTensor<T>&, const BasicTensor<T>&,       \
                                                 const Tensor&, KeyNorm);                           \
  template BasicTensor<T> masked_lambda_forward(const BasicTensor<T>&, const BasicTensor<T>&,        \
                                                const BasicLambdaParams<T>&, const LambdaConfig&,   \
                                                const MaskSpec&);                                   \
  template BasicTensor<T> multihead_lambda_forward(const BasicTensor<T>&, const BasicTensor<T>&,     \
                                                   const BasicLambdaParams<T>&,                     \
                                                   const LambdaConfig&);                            \
  template BasicTensor<T> intra_depth_forward(const BasicTensor<T>&, const BasicTensor<T>&,          \
                                              const BasicLambdaParams<T>&, const LambdaConfig&);    \
  template BasicTensor<T> content_only_forward(const BasicTensor<T>&, const BasicTensor<T>&,         \
                                               const BasicLambdaParams<T>&, const LambdaConfig&);   \
  template BasicTensor<T> variant_forward(Variant, const BasicTensor<T>&, const BasicTensor<T>&,     \
                                          const BasicLambdaParams<T>&, const LambdaConfig&,         \
                                          const MaskSpec*);

LAMBDANET_INSTANTIATE(double)
LAMBDANET_INSTANTIATE(float)

#undef LAMBDANET_INSTANTIATE

}  // namespace lambdanet
