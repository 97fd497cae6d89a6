// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/lambda_layer.hpp"

#include <cmath>

#include "lambdanet/contract.hpp"
#include "lambdanet/cost.hpp"
#include "lambdanet/lambda_conv.hpp"
#include "lambdanet/mutation.hpp"
#include "lambdanet/ops.hpp"
#include "lambdanet/rng.hpp"
#include "layer_internal.hpp"

namespace lambdanet {

KeyNorm parse_key_norm(std::string_view text) {
  if (text == "softmax") return KeyNorm::kSoftmax;
  if (text == "l2") return KeyNorm::kL2;
  if (text == "none") return KeyNorm::kNone;
  throw ConfigError("key normalization must be softmax, l2 or none, got '" + std::string(text) + "'");
}

PositionImpl parse_position_impl(std::string_view text) {
  if (text == "einsum") return PositionImpl::kEinsum;
  if (text == "conv") return PositionImpl::kConv;
  if (text == "depthwise") return PositionImpl::kDepthwise;
  throw ConfigError("impl must be einsum, conv or depthwise, got '" + std::string(text) + "'");
}

Interactions parse_interactions(std::string_view text) {
  if (text == "full" || text == "both") return Interactions::kBoth;
  if (text == "content-only") return Interactions::kContentOnly;
  if (text == "position-only") return Interactions::kPositionOnly;
  throw ConfigError("mode must be full, content-only or position-only, got '" + std::string(text) +
                    "'");
}

IntraDepthNorm parse_intra_depth_norm(std::string_view text) {
  if (text == "joint") return IntraDepthNorm::kJoint;
  if (text == "per-depth") return IntraDepthNorm::kPerDepth;
  throw ConfigError("intra-depth normalization must be joint or per-depth, got '" +
                    std::string(text) + "'");
}

std::string to_string(KeyNorm v) {
  switch (v) {
    case KeyNorm::kSoftmax: return "softmax";
    case KeyNorm::kL2: return "l2";
    case KeyNorm::kNone: return "none";
  }
  return "?";
}

std::string to_string(PositionImpl v) {
  switch (v) {
    case PositionImpl::kEinsum: return "einsum";
    case PositionImpl::kConv: return "conv";
    case PositionImpl::kDepthwise: return "depthwise";
  }
  return "?";
}

std::string to_string(Interactions v) {
  switch (v) {
    case Interactions::kBoth: return "full";
    case Interactions::kContentOnly: return "content-only";
    case Interactions::kPositionOnly: return "position-only";
  }
  return "?";
}

std::string to_string(IntraDepthNorm v) {
  return v == IntraDepthNorm::kJoint ? "joint" : "per-depth";
}

void LambdaConfig::validate() const {
  if (d_in == 0 || d_out == 0) throw ConfigError("d_in and d_out must be positive");
  if (k == 0) throw ConfigError("k must be at least 1");
  if (h == 0) throw ConfigError("h must be at least 1");
  if (u == 0) throw ConfigError("u must be at least 1");
  if (d_out % h != 0) {
    throw ConfigError("d_out = " + std::to_string(d_out) + " is not divisible by h = " +
                      std::to_string(h));
  }
  if (impl == PositionImpl::kDepthwise && u != 1) {
    throw ConfigError("the depthwise implementation requires u == 1");
  }
}

std::size_t num_buckets(const LambdaConfig& config) {
  return RelIndexMap::build(config.position).num_buckets();
}

LambdaParams init_params(const LambdaConfig& config, std::uint64_t seed) {
  config.validate();
  const double d = static_cast<double>(config.d_in);
  const std::size_t v = config.v();
  auto draw = [&](Shape shape, std::uint64_t substream, double stddev) {
    CounterRng rng(seed, Stream::kParams, substream);
    return random_normal(std::move(shape), rng, stddev);
  };
  LambdaParams p;
  p.w_q = draw({config.d_in, config.h * config.k}, 0, 1.0 / std::sqrt(static_cast<double>(config.k) * d));
  p.w_k = draw({config.d_in, config.k * config.u}, 1, 1.0 / std::sqrt(d));
  p.w_v = draw({config.d_in, v * config.u}, 2, 1.0 / std::sqrt(d));
  const std::size_t r = num_buckets(config);
  p.r = config.u == 1 ? draw({r, config.k}, 3, 1.0) : draw({r, config.k, config.u}, 3, 1.0);
  p.q_scale = Tensor::full({config.h * config.k}, 1.0);
  p.q_shift = Tensor({config.h * config.k});
  p.v_scale = Tensor::full({v * config.u}, 1.0);
  p.v_shift = Tensor({v * config.u});
  return p;
}

std::size_t expected_parameter_count(const LambdaConfig& config) {
  const std::size_t k = config.k, u = config.u;
  return config.d_in * (config.h * k + k * u + config.v() * u) + num_buckets(config) * k * u;
}

namespace {

template <class T>
BasicTensor<T> apply_hook(const BasicTensor<T>& t, const BasicTensor<T>& scale,
                          const BasicTensor<T>& shift) {
  return add(mul(t, scale), shift);
}

template <class T>
void check_weight(const BasicTensor<T>& w, std::size_t rows, std::size_t cols, const char* name) {
  if (w.shape() != Shape{rows, cols}) {
    throw ShapeError(std::string(name) + " must be " + to_string(Shape{rows, cols}) + ", got " +
                     to_string(w.shape()));
  }
}

}  // namespace

template <class T>
QueryKeyValue<T> project_qkv(const BasicTensor<T>& x, const BasicTensor<T>& context,
                             const BasicLambdaParams<T>& params, const LambdaConfig& config) {
  config.validate();
  if (x.rank() != 3 || context.rank() != 3) {
    throw ShapeError("inputs must be [b, n, d] and [b, m, d]");
  }
  if (x.extent(2) != config.d_in || context.extent(2) != config.d_in) {
    throw ShapeError("input channels " + std::to_string(x.extent(2)) + "/" +
                     std::to_string(context.extent(2)) + " do not match d_in = " +
                     std::to_string(config.d_in));
  }
  if (x.extent(0) != context.extent(0)) throw ShapeError("input and context batch sizes differ");
  const std::size_t b = x.extent(0), n = x.extent(1), m = context.extent(1);
  const std::size_t k = config.k, h = config.h, u = config.u, v = config.v();
  check_weight(params.w_q, config.d_in, h * k, "w_q");
  check_weight(params.w_k, config.d_in, k * u, "w_k");
  check_weight(params.w_v, config.d_in, v * u, "w_v");

  cost::Term term(cost::term::kProjection);
  auto q = contract<T>("bnd,de->bne", x, params.w_q);
  auto keys = contract<T>("bnd,de->bne", context, params.w_k);
  auto values = contract<T>("bnd,de->bne", context, params.w_v);
  if (config.qv_hook) {
    q = apply_hook(q, params.q_scale, params.q_shift);
    values = apply_hook(values, params.v_scale, params.v_shift);
  }
  QueryKeyValue<T> out;
  out.queries = q.reshape({b, n, h, k}).transpose({0, 2, 1, 3});
  if (u == 1) {
    out.keys = std::move(keys);
    out.values = std::move(values);
  } else {
    out.keys = keys.reshape({b, m, k, u});
    out.values = values.reshape({b, m, v, u});
  }
  return out;
}

template <class T>
BasicTensor<T> normalize_keys(const BasicTensor<T>& keys, KeyNorm mode, IntraDepthNorm intra) {
  if (keys.rank() != 3 && keys.rank() != 4) {
    throw ShapeError("keys must be [b, m, k] or [b, m, k, u], got " + to_string(keys.shape()));
  }
  if (mode == KeyNorm::kNone) return keys;
  auto norm = [mode](const BasicTensor<T>& t, std::size_t axis) {
    return mode == KeyNorm::kSoftmax ? softmax(t, axis) : l2_normalize(t, axis);
  };
  if (keys.rank() == 3 || intra == IntraDepthNorm::kPerDepth) return norm(keys, 1);
  // Joint over (m, u): bring k ahead of m so that (m, u) is one contiguous axis.
  const std::size_t b = keys.extent(0), m = keys.extent(1), k = keys.extent(2), u = keys.extent(3);
  auto joint = keys.transpose({0, 2, 1, 3}).reshape({b, k, m * u});
  return norm(joint, 2).reshape({b, k, m, u}).transpose({0, 2, 1, 3});
}

template <class T>
BasicTensor<T> content_lambda(const BasicTensor<T>& normalized_keys, const BasicTensor<T>& values) {
  cost::Term term(cost::term::kContent);
  auto out = normalized_keys.rank() == 4 ? contract<T>("bmku,bmvu->bkv", normalized_keys, values)
                                         : contract<T>("bmk,bmv->bkv", normalized_keys, values);
  if (mutation::active() == mutation::Mutation::kContentSign) {
    for (auto& x : out.data()) x = -x;
  }
  return out;
}

template <class T>
BasicTensor<T> position_lambdas_einsum(const BasicTensor<T>& embeddings, const BasicTensor<T>& values) {
  cost::Term term(cost::term::kPosition);
  if (embeddings.rank() == 4) return contract<T>("nmku,bmvu->bnkv", embeddings, values);
  return contract<T>("nmk,bmv->bnkv", embeddings, values);
}

template <class T>
BasicTensor<T> apply_lambdas(const BasicTensor<T>& queries, const BasicTensor<T>* content,
                             const BasicTensor<T>* position) {
  if (queries.rank() != 4) throw ShapeError("queries must be [b, h, n, k]");
  if (content == nullptr && position == nullptr) {
    throw ConfigError("at least one of the content and position lambdas is required");
  }
  cost::Term term(cost::term::kApply);
  const std::size_t b = queries.extent(0), h = queries.extent(1), n = queries.extent(2);
  BasicTensor<T> y;
  if (content != nullptr) y = contract<T>("bhnk,bkv->bnhv", queries, *content);
  if (position != nullptr) {
    auto yp = contract<T>("bhnk,bnkv->bnhv", queries, *position);
    y = content != nullptr ? add(y, yp) : std::move(yp);
  }
  const std::size_t v = y.extent(3);
  return y.reshape({b, n, h * v});
}

template <class T>
BasicTensor<T> lambda_core(const BasicTensor<T>& queries, const BasicTensor<T>& keys,
                           const BasicTensor<T>* embeddings, const BasicTensor<T>& values,
                           KeyNorm mode) {
  const auto normalized = normalize_keys(keys, mode);
  const auto lc = content_lambda(normalized, values);
  if (embeddings == nullptr) return apply_lambdas<T>(queries, &lc, nullptr);
  const auto lp = position_lambdas_einsum(*embeddings, values);
  return apply_lambdas<T>(queries, &lc, &lp);
}

template <class T>
BasicTensor<T> position_lambdas(const RelIndexMap& map, const BasicTensor<T>& table,
                                const BasicTensor<T>& values, PositionImpl impl) {
  switch (impl) {
    case PositionImpl::kEinsum:
      return position_lambdas_einsum(expand_embeddings(map, table), values);
    case PositionImpl::kConv: {
      cost::Term term(cost::term::kPosition);
      return position_lambdas_conv(table, values, map);
    }
    case PositionImpl::kDepthwise: {
      cost::Term term(cost::term::kPosition);
      return position_lambdas_depthwise(table, values, map);
    }
  }
  throw ConfigError("unknown position implementation");
}

namespace detail {

void check_inputs(const Shape& x, const Shape& context, const LambdaConfig& config) {
  if (x.size() != 3 || context.size() != 3) throw ShapeError("inputs must be [b, n, d] and [b, m, d]");
  if (!config.uses_position()) return;
  const std::size_t size = config.position.geometry.size();
  if (x[1] != size || context[1] != size) {
    throw ShapeError("position lambdas need n = m = " + std::to_string(size) + " for geometry " +
                     config.position.geometry.str() + ", got n = " + std::to_string(x[1]) +
                     ", m = " + std::to_string(context[1]));
  }
}

template <class T>
BasicTensor<T> multi_query_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                   const BasicLambdaParams<T>& params, const LambdaConfig& config) {
  config.validate();
  check_inputs(x.shape(), context.shape(), config);
  const auto qkv = project_qkv(x, context, params, config);
  BasicTensor<T> lc, lp;
  if (config.uses_content()) {
    lc = content_lambda(normalize_keys(qkv.keys, config.key_norm, config.intra_depth_norm), qkv.values);
  }
  if (config.uses_position()) {
    const auto map = RelIndexMap::build(config.position);
    lp = position_lambdas(map, params.r, qkv.values, config.impl);
  }
  return apply_lambdas<T>(qkv.queries, config.uses_content() ? &lc : nullptr,
                          config.uses_position() ? &lp : nullptr);
}

template Tensor multi_query_forward(const Tensor&, const Tensor&, const LambdaParams&,
                                    const LambdaConfig&);
template TensorF multi_query_forward(const TensorF&, const TensorF&, const BasicLambdaParams<float>&,
                                     const LambdaConfig&);

}  // namespace detail

template <class T>
BasicTensor<T> lambda_layer_forward(const BasicTensor<T>& x, const BasicTensor<T>& context,
                                    const BasicLambdaParams<T>& params, const LambdaConfig& config) {
  if (config.u != 1) throw ConfigError("lambda_layer_forward requires u == 1; use intra_depth_forward");
  return detail::multi_query_forward(x, context, params, config);
}

#define LAMBDANET_INSTANTIATE(T)                                                                    \
  template QueryKeyValue<T> project_qkv(const BasicTensor<T>&, const BasicTensor<T>&,                \
                                        const BasicLambdaParams<T>&, const LambdaConfig&);          \
  template BasicTensor<T> normalize_keys(const BasicTensor<T>&, KeyNorm, IntraDepthNorm);            \
  template BasicTensor<T> content_lambda(const BasicTensor<T>&, const BasicTensor<T>&);              \
  template BasicTensor<T> position_lambdas_einsum(const BasicTensor<T>&, const BasicTensor<T>&);     \
  template BasicTensor<T> apply_lambdas(const BasicTensor<T>&, const BasicTensor<T>*,                \
                                        const BasicTensor<T>*);                                     \
  template BasicTensor<T> lambda_core(const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                      const BasicTensor<T>*, const BasicTensor<T>&, KeyNorm);       \
  template BasicTensor<T> position_lambdas(const RelIndexMap&, const BasicTensor<T>&,                \
                                           const BasicTensor<T>&, PositionImpl);                    \
  template BasicTensor<T> lambda_layer_forward(const BasicTensor<T>&, const BasicTensor<T>&,         \
                                               const BasicLambdaParams<T>&, const LambdaConfig&);

LAMBDANET_INSTANTIATE(double)
LAMBDANET_INSTANTIATE(float)

#undef LAMBDANET_INSTANTIATE

}  // namespace lambdanet
