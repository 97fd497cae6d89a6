// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/grad.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "lambdanet/contract.hpp"
#include "lambdanet/lambda_conv.hpp"
#include "lambdanet/ops.hpp"
#include "lambdanet/rng.hpp"
#include "layer_internal.hpp"

namespace lambdanet {
namespace {

Tensor c2(std::string_view spec, const Tensor& a, const Tensor& b) { return contract<double>(spec, a, b); }

// Calls fn(base, stride, length) for every 1-d slice along `axis`.
template <class Fn>
void for_each_slice(const Shape& shape, std::size_t axis, Fn&& fn) {
  if (axis >= shape.size()) throw ShapeError("axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) fn(o * len * inner + i, inner, len);
  }
}

// Projections before and after the hook.
struct Projected {
  Tensor q0, k0, v0;  // [b, n, h*k], [b, m, k*u or h*k], [b, m, v*u or h*v]
  Tensor qh, vh;
};

Projected project(const Tensor& x, const Tensor& context, const LambdaParams& params,
                  const LambdaConfig& config) {
  Projected p;
  p.q0 = c2("bnd,de->bne", x, params.w_q);
  p.k0 = c2("bnd,de->bne", context, params.w_k);
  p.v0 = c2("bnd,de->bne", context, params.w_v);
  p.qh = config.qv_hook ? add(mul(p.q0, params.q_scale), params.q_shift) : p.q0;
  p.vh = config.qv_hook ? add(mul(p.v0, params.v_scale), params.v_shift) : p.v0;
  return p;
}

// Back through the hooks and projections given the gradients of the hooked
// queries, raw keys and hooked values.
void project_backward(const Tensor& x, const Tensor& context, const LambdaParams& params,
                      const LambdaConfig& config, const Projected& p, const Tensor& dqh,
                      const Tensor& dk0, const Tensor& dvh, GradBundle& g) {
  Tensor dq0 = dqh, dv0 = dvh;
  g.q_scale = Tensor(params.q_scale.shape());
  g.q_shift = Tensor(params.q_shift.shape());
  g.v_scale = Tensor(params.v_scale.shape());
  g.v_shift = Tensor(params.v_shift.shape());
  if (config.qv_hook) {
    g.q_scale = sum_leading(mul(dqh, p.q0), 1);
    g.q_shift = sum_leading(dqh, 1);
    g.v_scale = sum_leading(mul(dvh, p.v0), 1);
    g.v_shift = sum_leading(dvh, 1);
    dq0 = mul(dqh, params.q_scale);
    dv0 = mul(dvh, params.v_scale);
  }
  g.w_q = c2("bnd,bne->de", x, dq0);
  g.w_k = c2("bmd,bme->de", context, dk0);
  g.w_v = c2("bmd,bme->de", context, dv0);
  g.x = c2("bne,de->bnd", dq0, params.w_q);
  g.context = add(c2("bme,de->bmd", dk0, params.w_k), c2("bme,de->bmd", dv0, params.w_v));
}

Tensor norm_backward(const Tensor& raw, const Tensor& normalized, const Tensor& grad, KeyNorm mode,
                     std::size_t axis) {
  switch (mode) {
    case KeyNorm::kSoftmax: return softmax_backward(normalized, grad, axis);
    case KeyNorm::kL2: return l2_normalize_backward(raw, grad, axis);
    case KeyNorm::kNone: return grad;
  }
  throw ConfigError("unknown key normalization");
}

// Adjoint of normalize_keys for [b, m, k] or [b, m, k, u] keys.
Tensor normalize_keys_backward(const Tensor& keys, const Tensor& normalized, const Tensor& grad,
                               KeyNorm mode, IntraDepthNorm intra) {
  if (keys.rank() == 3 || intra == IntraDepthNorm::kPerDepth) {
    return norm_backward(keys, normalized, grad, mode, 1);
  }
  const std::size_t b = keys.extent(0), m = keys.extent(1), k = keys.extent(2), u = keys.extent(3);
  auto joint = [&](const Tensor& t) { return t.transpose({0, 2, 1, 3}).reshape({b, k, m * u}); };
  return norm_backward(joint(keys), joint(normalized), joint(grad), mode, 2)
      .reshape({b, k, m, u})
      .transpose({0, 2, 1, 3});
}

GradBundle multi_query_backward(const Tensor& x, const Tensor& context, const LambdaParams& params,
                                const LambdaConfig& config, const Tensor& upstream) {
  const std::size_t b = x.extent(0), n = x.extent(1), m = context.extent(1);
  const std::size_t h = config.h, k = config.k, v = config.v(), u = config.u;
  const auto p = project(x, context, params, config);
  const Tensor q = p.qh.reshape({b, n, h, k}).transpose({0, 2, 1, 3});
  const Tensor keys = u == 1 ? p.k0 : p.k0.reshape({b, m, k, u});
  const Tensor values = u == 1 ? p.vh : p.vh.reshape({b, m, v, u});
  const Tensor g4 = upstream.reshape({b, n, h, v});

  Tensor dq(q.shape()), dkeys(keys.shape()), dvalues(values.shape());
  GradBundle g;
  g.r = Tensor(params.r.shape());
  if (config.uses_content()) {
    const auto normalized = normalize_keys(keys, config.key_norm, config.intra_depth_norm);
    const auto lc = content_lambda(normalized, values);
    dq = add(dq, c2("bnhv,bkv->bhnk", g4, lc));
    const auto dlc = c2("bhnk,bnhv->bkv", q, g4);
    Tensor dnorm;
    if (u == 1) {
      dnorm = c2("bkv,bmv->bmk", dlc, values);
      dvalues = add(dvalues, c2("bmk,bkv->bmv", normalized, dlc));
    } else {
      dnorm = c2("bkv,bmvu->bmku", dlc, values);
      dvalues = add(dvalues, c2("bmku,bkv->bmvu", normalized, dlc));
    }
    dkeys = normalize_keys_backward(keys, normalized, dnorm, config.key_norm, config.intra_depth_norm);
  }
  if (config.uses_position()) {
    const auto map = RelIndexMap::build(config.position);
    const auto lp = position_lambdas(map, params.r, values, config.impl);
    dq = add(dq, c2("bnhv,bnkv->bhnk", g4, lp));
    const auto dlp = c2("bhnk,bnhv->bnkv", q, g4);
    if (config.impl == PositionImpl::kEinsum) {
      const auto e = expand_embeddings(map, params.r);
      Tensor de;
      if (u == 1) {
        de = c2("bnkv,bmv->nmk", dlp, values);
        dvalues = add(dvalues, c2("nmk,bnkv->bmv", e, dlp));
      } else {
        de = c2("bnkv,bmvu->nmku", dlp, values);
        dvalues = add(dvalues, c2("nmku,bnkv->bmvu", e, dlp));
      }
      g.r = scatter_embedding_grad(map, de);
    } else {
      auto cg = config.impl == PositionImpl::kConv
                    ? position_lambdas_conv_backward(params.r, values, map, dlp)
                    : position_lambdas_depthwise_backward(params.r, values, map, dlp);
      g.r = std::move(cg.table);
      dvalues = add(dvalues, cg.values);
    }
  }
  project_backward(x, context, params, config, p, dq.transpose({0, 2, 1, 3}).reshape({b, n, h * k}),
                   dkeys.reshape({b, m, k * u}), dvalues.reshape({b, m, v * u}), g);
  return g;
}

GradBundle masked_backward(const Tensor& x, const Tensor& context, const LambdaParams& params,
                           const LambdaConfig& config, const Tensor& upstream, const MaskSpec& mask) {
  const std::size_t b = x.extent(0), n = x.extent(1), m = context.extent(1);
  const std::size_t h = config.h, k = config.k, v = config.v();
  mask.validate(n, m);
  const auto p = project(x, context, params, config);
  const Tensor q = p.qh.reshape({b, n, h, k}).transpose({0, 2, 1, 3});
  const Tensor& keys = p.k0;
  const Tensor& values = p.vh;
  const Tensor g4 = upstream.reshape({b, n, h, v});

  Tensor dq(q.shape()), dkeys(keys.shape()), dvalues(values.shape());
  GradBundle g;
  g.r = Tensor(params.r.shape());
  if (config.uses_content()) {
    const auto lc = masked_content_lambdas(keys, values, mask.mask, config.key_norm);
    dq = add(dq, c2("bnhv,bnkv->bhnk", g4, lc));
    const auto dlc = c2("bhnk,bnhv->bnkv", q, g4);
    std::vector<double> w, dw(m);
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t ni = 0; ni < n; ++ni) {
        const double* row = mask.mask.raw() + ni * m;
        for (std::size_t ki = 0; ki < k; ++ki) {
          detail::masked_key_weights(keys, bi, ki, row, config.key_norm, w);
          const double* dl = dlc.raw() + ((bi * n + ni) * k + ki) * v;
          double dot = 0.0;
          for (std::size_t mi = 0; mi < m; ++mi) {
            dw[mi] = 0.0;
            if (row[mi] == 0.0) continue;
            const double* vr = values.raw() + (bi * m + mi) * v;
            double* dvr = dvalues.raw() + (bi * m + mi) * v;
            for (std::size_t vi = 0; vi < v; ++vi) {
              dw[mi] += dl[vi] * vr[vi];
              dvr[vi] += w[mi] * dl[vi];
            }
            dot += w[mi] * dw[mi];
          }
          double norm = 0.0;
          if (config.key_norm == KeyNorm::kL2) {
            for (std::size_t mi = 0; mi < m; ++mi) {
              if (row[mi] != 0.0) norm += keys[(bi * m + mi) * k + ki] * keys[(bi * m + mi) * k + ki];
            }
            norm = std::sqrt(norm);
          }
          for (std::size_t mi = 0; mi < m; ++mi) {
            if (row[mi] == 0.0) continue;
            double& dk = dkeys[(bi * m + mi) * k + ki];
            switch (config.key_norm) {
              case KeyNorm::kSoftmax: dk += w[mi] * (dw[mi] - dot); break;
              case KeyNorm::kL2:
                if (norm > 0.0) dk += (dw[mi] - w[mi] * dot) / norm;
                break;
              case KeyNorm::kNone: dk += dw[mi]; break;
            }
          }
        }
      }
    }
  }
  if (config.uses_position()) {
    const auto map = RelIndexMap::build(config.position);
    const auto masked = c2("nmk,nm->nmk", expand_embeddings(map, params.r), mask.mask);
    const auto lp = position_lambdas_einsum(masked, values);
    dq = add(dq, c2("bnhv,bnkv->bhnk", g4, lp));
    const auto dlp = c2("bhnk,bnhv->bnkv", q, g4);
    const auto dmasked = c2("bnkv,bmv->nmk", dlp, values);
    dvalues = add(dvalues, c2("nmk,bnkv->bmv", masked, dlp));
    g.r = scatter_embedding_grad(map, c2("nmk,nm->nmk", dmasked, mask.mask));
  }
  project_backward(x, context, params, config, p, dq.transpose({0, 2, 1, 3}).reshape({b, n, h * k}),
                   dkeys, dvalues, g);
  return g;
}

GradBundle multihead_backward(const Tensor& x, const Tensor& context, const LambdaParams& params,
                              const LambdaConfig& config, const Tensor& upstream) {
  const std::size_t b = x.extent(0), n = x.extent(1), m = context.extent(1);
  const std::size_t h = config.h, k = config.k, v = config.v();
  const auto p = project(x, context, params, config);
  const Tensor q = p.qh.reshape({b, n, h, k}).transpose({0, 2, 1, 3});
  const Tensor keys = p.k0.reshape({b, m, h, k}).transpose({0, 2, 1, 3});
  const Tensor values = p.vh.reshape({b, m, h, v}).transpose({0, 2, 1, 3});
  const Tensor g4 = upstream.reshape({b, n, h, v});

  Tensor dq(q.shape()), dkeys(keys.shape()), dvalues(values.shape());
  GradBundle g;
  g.r = Tensor(params.r.shape());
  if (config.uses_content()) {
    Tensor normalized = keys;
    if (config.key_norm == KeyNorm::kSoftmax) normalized = softmax(keys, 2);
    if (config.key_norm == KeyNorm::kL2) normalized = l2_normalize(keys, 2);
    const auto lc = c2("bhmk,bhmv->bhkv", normalized, values);
    dq = add(dq, c2("bnhv,bhkv->bhnk", g4, lc));
    const auto dlc = c2("bhnk,bnhv->bhkv", q, g4);
    dvalues = add(dvalues, c2("bhmk,bhkv->bhmv", normalized, dlc));
    dkeys = norm_backward(keys, normalized, c2("bhkv,bhmv->bhmk", dlc, values), config.key_norm, 2);
  }
  if (config.uses_position()) {
    const auto map = RelIndexMap::build(config.position);
    const auto e = detail::multihead_embeddings(map, params.r);
    const auto lp = c2("hnmk,bhmv->bnhkv", e, values);
    dq = add(dq, c2("bnhv,bnhkv->bhnk", g4, lp));
    const auto dlp = c2("bhnk,bnhv->bnhkv", q, g4);
    dvalues = add(dvalues, c2("hnmk,bnhkv->bhmv", e, dlp));
    const auto de = c2("bnhkv,bhmv->hnmk", dlp, values);
    const std::size_t slice = n * m * k, rows = params.r.extent(1);
    for (std::size_t head = 0; head < h; ++head) {
      Tensor de_head({n, m, k}, std::span<const double>(de.raw() + head * slice, slice));
      const auto dr = scatter_embedding_grad(map, de_head);
      std::copy(dr.raw(), dr.raw() + dr.size(), g.r.raw() + head * rows * k);
    }
  }
  project_backward(x, context, params, config, p, dq.transpose({0, 2, 1, 3}).reshape({b, n, h * k}),
                   dkeys.transpose({0, 2, 1, 3}).reshape({b, m, h * k}),
                   dvalues.transpose({0, 2, 1, 3}).reshape({b, m, h * v}), g);
  return g;
}

}  // namespace

Tensor softmax_backward(const Tensor& y, const Tensor& grad, std::size_t axis) {
  if (y.shape() != grad.shape()) throw ShapeError("softmax_backward shape mismatch");
  Tensor out(y.shape());
  for_each_slice(y.shape(), axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    double dot = 0.0;
    for (std::size_t j = 0; j < len; ++j) dot += y[base + j * stride] * grad[base + j * stride];
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t i = base + j * stride;
      out[i] = y[i] * (grad[i] - dot);
    }
  });
  return out;
}

Tensor l2_normalize_backward(const Tensor& x, const Tensor& grad, std::size_t axis) {
  if (x.shape() != grad.shape()) throw ShapeError("l2_normalize_backward shape mismatch");
  Tensor out(x.shape());
  for_each_slice(x.shape(), axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    double sq = 0.0;
    for (std::size_t j = 0; j < len; ++j) sq += x[base + j * stride] * x[base + j * stride];
    if (sq == 0.0) return;  // the forward pass maps zero slices to constant zero
    const double norm = std::sqrt(sq);
    double dot = 0.0;
    for (std::size_t j = 0; j < len; ++j) dot += x[base + j * stride] / norm * grad[base + j * stride];
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t i = base + j * stride;
      out[i] = (grad[i] - x[i] / norm * dot) / norm;
    }
  });
  return out;
}

GradBundle backward(Variant variant, const Tensor& x, const Tensor& context, const LambdaParams& params,
                    const LambdaConfig& config, const Tensor& upstream, const MaskSpec* mask) {
  config.validate();
  detail::check_inputs(x.shape(), context.shape(), config);
  const Shape expected{x.extent(0), x.extent(1), config.d_out};
  if (upstream.shape() != expected) {
    throw ShapeError("upstream gradient " + to_string(upstream.shape()) + " does not match output " +
                     to_string(expected));
  }
  if (variant == Variant::kMasked && mask == nullptr) throw ConfigError("the masked variant needs a mask");
  if (variant != Variant::kIntraDepth && variant != Variant::kMultihead && config.u != 1) {
    throw ConfigError("u > 1 is only supported by the intra-depth variant");
  }
  if ((variant == Variant::kMasked || variant == Variant::kMultihead) &&
      config.impl != PositionImpl::kEinsum) {
    throw ConfigError(to_string(variant) + " uses the einsum position path");
  }
  if (variant == Variant::kMultihead && config.u != 1) throw ConfigError("the multi-head layer requires u == 1");
  switch (variant) {
    case Variant::kGlobal:
    case Variant::kIntraDepth:
      return multi_query_backward(x, context, params, config, upstream);
    case Variant::kContentOnly: {
      LambdaConfig c = config;
      c.interactions = Interactions::kContentOnly;
      return multi_query_backward(x, context, params, c, upstream);
    }
    case Variant::kMasked: return masked_backward(x, context, params, config, upstream, *mask);
    case Variant::kMultihead: return multihead_backward(x, context, params, config, upstream);
  }
  throw ConfigError("unknown variant");
}

FiniteDiffResult finite_diff_check(const std::string& name,
                                   const std::function<long double(const Tensor&)>& f, const Tensor& theta,
                                   const Tensor& analytic, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  if (analytic.shape() != theta.shape()) {
    throw ShapeError("analytic gradient for " + name + " has shape " + to_string(analytic.shape()) +
                     ", expected " + to_string(theta.shape()));
  }
  FiniteDiffResult result;
  result.name = name;
  result.coordinates = theta.size();
  Tensor probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double up = theta[i] + step, down = theta[i] - step;
    probe[i] = up;
    const long double plus = f(probe);
    probe[i] = down;
    const long double minus = f(probe);
    probe[i] = theta[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("non-finite loss while perturbing " + name + "[" + std::to_string(i) + "]");
    }
    // Divide by the step actually taken after rounding theta +- step.
    const double numeric = static_cast<double>((plus - minus) / (static_cast<long double>(up) - down));
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    if (i == 0 || rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

Tensor random_functional(const Shape& shape, std::uint64_t seed) {
  CounterRng rng(seed, Stream::kUpstream);
  return random_normal(shape, rng);
}

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

GradCheckReport gradient_check(Variant variant, const LambdaConfig& config, std::size_t batch,
                               std::uint64_t seed, double step) {
  config.validate();
  const std::size_t n = config.position.geometry.size();
  CounterRng x_rng(seed, Stream::kData, 0), c_rng(seed, Stream::kData, 1);
  const Tensor x = random_normal({batch, n, config.d_in}, x_rng);
  const Tensor context = random_normal({batch, n, config.d_in}, c_rng);
  LambdaParams params = init_variant_params(variant, config, seed);
  if (config.qv_hook) {
    CounterRng hook_rng(seed, Stream::kParams, 16);
    params.q_scale = random_uniform(params.q_scale.shape(), hook_rng, 0.5, 1.5);
    params.q_shift = random_normal(params.q_shift.shape(), hook_rng, 0.1);
    params.v_scale = random_uniform(params.v_scale.shape(), hook_rng, 0.5, 1.5);
    params.v_shift = random_normal(params.v_shift.shape(), hook_rng, 0.1);
  }
  std::optional<MaskSpec> mask;
  if (variant == Variant::kMasked) mask = MaskSpec::causal(n);
  const MaskSpec* mask_ptr = mask ? &*mask : nullptr;

  const auto y = variant_forward(variant, x, context, params, config, mask_ptr);
  const Tensor functional = random_functional(y.shape(), seed);
  const auto grads = backward(variant, x, context, params, config, functional, mask_ptr);

  auto loss = [&](const Tensor& xs, const Tensor& cs, const LambdaParams& ps) {
    const auto out = variant_forward(variant, xs, cs, ps, config, mask_ptr);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < out.size(); ++i) {
      sum += static_cast<long double>(functional[i]) * static_cast<long double>(out[i]);
    }
    return sum;
  };

  GradCheckReport report;
  report.variant = variant;
  report.entries.push_back(finite_diff_check(
      "x", [&](const Tensor& t) { return loss(t, context, params); }, x, grads.x, step));
  report.entries.push_back(finite_diff_check(
      "context", [&](const Tensor& t) { return loss(x, t, params); }, context, grads.context, step));
  auto param_entry = [&](const char* name, Tensor LambdaParams::*member, const Tensor& analytic) {
    report.entries.push_back(finite_diff_check(
        name,
        [&](const Tensor& t) {
          LambdaParams ps = params;
          ps.*member = t;
          return loss(x, context, ps);
        },
        params.*member, analytic, step));
  };
  param_entry("w_q", &LambdaParams::w_q, grads.w_q);
  param_entry("w_k", &LambdaParams::w_k, grads.w_k);
  param_entry("w_v", &LambdaParams::w_v, grads.w_v);
  param_entry("r", &LambdaParams::r, grads.r);
  if (config.qv_hook) {
    param_entry("q_scale", &LambdaParams::q_scale, grads.q_scale);
    param_entry("q_shift", &LambdaParams::q_shift, grads.q_shift);
    param_entry("v_scale", &LambdaParams::v_scale, grads.v_scale);
    param_entry("v_shift", &LambdaParams::v_shift, grads.v_shift);
  }
  return report;
}

}  // namespace lambdanet
