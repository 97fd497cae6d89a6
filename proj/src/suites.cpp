// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "lambdanet/attention.hpp"
#include "lambdanet/complexity.hpp"
#include "lambdanet/contract.hpp"
#include "lambdanet/cost.hpp"
#include "lambdanet/grad.hpp"
#include "lambdanet/lambda_conv.hpp"
#include "lambdanet/memory.hpp"
#include "lambdanet/ops.hpp"
#include "lambdanet/reference.hpp"
#include "lambdanet/toy_task.hpp"
#include "lambdanet/variants.hpp"

namespace lambdanet {
namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

class Prop {
 public:
  Prop(std::string name, double tolerance) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
  }

  void close(double err, const std::string& what) {
    ++r_.cases;
    if (std::isnan(err)) err = INFINITY;
    r_.worst_error = std::max(r_.worst_error, err);
    if (!(err <= r_.tolerance) && r_.passed) {
      r_.passed = false;
      r_.detail = what + ": error " + fmt(err) + " > " + fmt(r_.tolerance);
    }
  }

  void exact(bool same, const std::string& what) {
    ++r_.cases;
    if (!same && r_.passed) {
      r_.passed = false;
      r_.detail = what + ": not identical";
    }
  }

  void fail(const std::string& what) {
    ++r_.cases;
    if (r_.passed) {
      r_.passed = false;
      r_.detail = what;
    }
  }

  PropertyResult done(const std::string& covered) {
    if (r_.passed) r_.detail = covered;
    return r_;
  }

 private:
  PropertyResult r_;
};

double diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  return max_abs_diff(a, b);
}

// Value equality of every element (so +0 and -0 match).
bool same(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

std::string describe(const LambdaConfig& c, std::size_t b) {
  std::ostringstream os;
  os << "b=" << b << " geom=" << c.position.geometry.str() << " boundary=" << to_string(c.position.boundary)
     << " scope=" << (c.position.scope ? scope_str(*c.position.scope) : "none") << " d=" << c.d_in
     << " k=" << c.k << " h=" << c.h << " v=" << c.v() << " u=" << c.u << " norm=" << to_string(c.key_norm)
     << " impl=" << to_string(c.impl) << " mode=" << to_string(c.interactions) << " hook=" << c.qv_hook;
  return os.str();
}

std::size_t pick(CounterRng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

// Largest odd scope valid on an axis of extent n.
std::size_t max_scope(std::size_t n, Boundary boundary) {
  const std::size_t limit = boundary == Boundary::kClamped ? 2 * n - 1 : n;
  return limit % 2 == 1 ? limit : limit - 1;
}

PositionSpec random_position(CounterRng& rng, std::size_t max_extent, bool allow_grid, bool want_scope) {
  PositionSpec p;
  if (allow_grid && rng.below(2) == 1) {
    const std::size_t gmax = std::max<std::size_t>(1, max_extent / 2);
    p.geometry = Geometry::grid(pick(rng, 1, gmax), pick(rng, 1, gmax));
  } else {
    p.geometry = Geometry::seq(pick(rng, 1, max_extent));
  }
  p.boundary = rng.below(2) == 1 ? Boundary::kCircular : Boundary::kClamped;
  if (want_scope) {
    Scope s;
    for (auto n : p.geometry.dims) s.push_back(2 * pick(rng, 0, (max_scope(n, p.boundary) - 1) / 2) + 1);
    p.scope = s;
  }
  return p;
}

void randomize_hook(LambdaParams& params, std::uint64_t seed) {
  CounterRng rng(seed, Stream::kParams, 16);
  for (auto* t : {&params.q_scale, &params.v_scale}) {
    for (auto& x : t->data()) x = rng.uniform(0.5, 1.5);
  }
  for (auto* t : {&params.q_shift, &params.v_shift}) {
    for (auto& x : t->data()) x = rng.uniform(-0.5, 0.5);
  }
}

Tensor random_mask(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, Stream::kMask, index);
  Tensor mask({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      mask[i * n + j] = rng.uniform() < 0.6 ? 1.0 : 0.0;
      any = any || mask[i * n + j] != 0.0;
    }
    if (!any) mask[i * n + rng.below(n)] = 1.0;
  }
  return mask;
}

struct LayerCase {
  Variant variant = Variant::kGlobal;
  LambdaConfig config;
  std::size_t b = 1;
  Tensor x, context;
  LambdaParams params;
  std::optional<MaskSpec> mask;
  std::string label;

  const MaskSpec* mask_ptr() const { return mask ? &*mask : nullptr; }
};

struct CaseLimits {
  std::size_t max_extent = 4;
  std::size_t max_dim = 4;
  bool allow_grid = true;
};

// A seeded random layer for the given variant. `impl` forces the position
// implementation when set; otherwise einsum-only variants use einsum and the
// global variant picks any valid path.
LayerCase make_case(Variant variant, std::uint64_t seed, std::uint64_t index, const CaseLimits& lim,
                    std::optional<PositionImpl> impl = std::nullopt, std::optional<bool> scoped = std::nullopt) {
  CounterRng rng(seed, Stream::kShapes, index);
  LayerCase lc;
  lc.variant = variant;
  auto& c = lc.config;
  lc.b = pick(rng, 1, lim.max_dim);
  c.d_in = pick(rng, 1, lim.max_dim);
  c.k = pick(rng, 1, lim.max_dim);
  c.h = pick(rng, 1, lim.max_dim);
  c.d_out = c.h * pick(rng, 1, lim.max_dim);
  const bool einsum_only = variant == Variant::kMasked || variant == Variant::kMultihead;
  if (impl && *impl != PositionImpl::kEinsum) scoped = true;
  const bool want_scope = scoped.value_or(rng.below(2) == 1);
  c.position = random_position(rng, lim.max_extent, lim.allow_grid, want_scope);
  c.key_norm = static_cast<KeyNorm>(rng.below(3));
  c.qv_hook = rng.below(2) == 1;
  c.interactions = static_cast<Interactions>(rng.below(3));
  if (variant == Variant::kContentOnly) c.interactions = Interactions::kContentOnly;
  if (variant == Variant::kIntraDepth) {
    c.u = pick(rng, 1, 3);
    c.intra_depth_norm = static_cast<IntraDepthNorm>(rng.below(2));
  }
  if (impl) {
    c.impl = *impl;
  } else if (!einsum_only && c.position.scope) {
    c.impl = static_cast<PositionImpl>(rng.below(c.u == 1 ? 3 : 2));
  }
  const std::size_t n = c.position.geometry.size();
  lc.params = init_variant_params(variant, c, seed ^ (index * 0x9E3779B97F4A7C15ULL));
  if (c.qv_hook) randomize_hook(lc.params, seed + index);
  CounterRng xr(seed + index, Stream::kData, 0), cr(seed + index, Stream::kData, 1);
  lc.x = random_normal({lc.b, n, c.d_in}, xr);
  lc.context = random_normal({lc.b, n, c.d_in}, cr);
  if (variant == Variant::kMasked) {
    lc.mask = rng.below(3) == 0 ? MaskSpec::causal(n) : MaskSpec{random_mask(n, seed, index)};
  }
  lc.label = to_string(variant) + " " + describe(c, lc.b);
  return lc;
}

Tensor forward(const LayerCase& lc) {
  return variant_forward(lc.variant, lc.x, lc.context, lc.params, lc.config, lc.mask_ptr());
}

Tensor oracle(const LayerCase& lc) {
  return reference::layer_forward(lc.variant, lc.x, lc.context, lc.params, lc.config, lc.mask_ptr());
}

// ---------------------------------------------------------------------------

SuiteReport oracle_suite(const SuiteOptions& opt) {
  SuiteReport rep{"oracle", {}};
  const CaseLimits lim;
  const std::pair<Variant, std::size_t> plan[] = {{Variant::kGlobal, 120},   {Variant::kMasked, 40},
                                                  {Variant::kMultihead, 40}, {Variant::kIntraDepth, 40},
                                                  {Variant::kContentOnly, 40}};
  for (const auto& [variant, count] : plan) {
    Prop p(to_string(variant) + "-vs-loop-oracle", 1e-12);
    for (std::size_t i = 0; i < count; ++i) {
      const auto lc = make_case(variant, opt.seed, 1000 * static_cast<std::uint64_t>(variant) + i, lim);
      p.close(diff(forward(lc), oracle(lc)), lc.label);
    }
    rep.properties.push_back(p.done(std::to_string(count) + " seeded shape combos, extents <= 4"));
  }

  Prop add("additive-decomposition", 0.0);
  for (std::size_t i = 0; i < 40; ++i) {
    auto lc = make_case(Variant::kGlobal, opt.seed, 9000 + i, lim);
    lc.config.interactions = Interactions::kBoth;
    const auto full = forward(lc);
    lc.config.interactions = Interactions::kContentOnly;
    const auto yc = forward(lc);
    lc.config.interactions = Interactions::kPositionOnly;
    const auto yp = forward(lc);
    add.exact(same(full, lambdanet::add(yc, yp)), lc.label);
  }
  rep.properties.push_back(add.done("Y(full) == Y(content) + Y(position) bit for bit"));

  Prop lin("content-only-equals-linear-attention", 1e-12);
  for (std::size_t i = 0; i < 40; ++i) {
    auto lc = make_case(Variant::kContentOnly, opt.seed, 9500 + i, lim);
    lc.config.key_norm = KeyNorm::kSoftmax;
    const auto y = forward(lc);
    const auto qkv = project_qkv(lc.x, lc.context, lc.params, lc.config);
    const std::size_t b = lc.b, h = lc.config.h, n = lc.x.extent(1), m = lc.context.extent(1);
    const std::size_t k = lc.config.k, v = lc.config.v();
    Tensor keys({b, h, m, k}), values({b, h, m, v});
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t hi = 0; hi < h; ++hi) {
        for (std::size_t j = 0; j < m * k; ++j) keys[(bi * h + hi) * m * k + j] = qkv.keys[bi * m * k + j];
        for (std::size_t j = 0; j < m * v; ++j) values[(bi * h + hi) * m * v + j] = qkv.values[bi * m * v + j];
      }
    }
    const auto att = linear_attention_forward(qkv.queries, keys, values);  // [b, h, n, v]
    const auto expect = att.transpose({0, 2, 1, 3}).reshape({b, n, h * v});
    lin.close(diff(y, expect), lc.label);
  }
  rep.properties.push_back(lin.done("softmax-over-m key features, per-head linear attention"));
  return rep;
}

// ---------------------------------------------------------------------------

SuiteReport equivalence_suite(const SuiteOptions& opt) {
  SuiteReport rep{"equivalence", {}};
  const bool want_conv = !opt.impl || *opt.impl == PositionImpl::kConv;
  const bool want_dw = !opt.impl || *opt.impl == PositionImpl::kDepthwise;
  Prop conv("conv-vs-einsum", 1e-12), dw("depthwise-vs-einsum", 1e-12), taps("einsum-vs-tap-oracle", 1e-12);
  Prop bits("conv-vs-depthwise-bits", 0.0), layer("layer-conv-vs-einsum", 1e-12);
  Prop counts("conv-multiplies", 0.0);

  std::vector<Geometry> geometries;
  for (std::size_t n = 1; n <= 6; ++n) geometries.push_back(Geometry::seq(n));
  for (std::size_t hh = 1; hh <= 6; ++hh) {
    for (std::size_t ww = 1; ww <= 6; ++ww) geometries.push_back(Geometry::grid(hh, ww));
  }
  std::uint64_t index = 0;
  for (const auto& g : geometries) {
    for (auto boundary : {Boundary::kClamped, Boundary::kCircular}) {
      for (std::size_t s : {1, 3, 5}) {
        bool valid = true;
        for (auto n : g.dims) valid = valid && s <= max_scope(n, boundary);
        if (!valid) continue;
        ++index;
        const PositionSpec pos{g, boundary, Scope(g.axes(), s)};
        const auto map = RelIndexMap::build(pos);
        const std::size_t b = 2, k = 3, v = 2, n = g.size();
        CounterRng tr(opt.seed + index, Stream::kParams, 3), vr(opt.seed + index, Stream::kData, 0);
        const auto table = random_normal({map.num_buckets(), k}, tr);
        const auto values = random_normal({b, n, v}, vr);
        const std::string what = "geom=" + g.str() + " boundary=" + to_string(boundary) + " scope=" + std::to_string(s);

        const auto e = position_lambdas(map, table, values, PositionImpl::kEinsum);
        taps.close(diff(e, reference::local_position_lambdas(map, table, values)), what);
        std::uint64_t conv_count = 0, dw_count = 0;
        Tensor c, d;
        if (want_conv) {
          cost::Counter counter;
          c = position_lambdas(map, table, values, PositionImpl::kConv);
          conv_count = counter.total();
          conv.close(diff(c, e), what);
        }
        if (want_dw) {
          cost::Counter counter;
          d = position_lambdas(map, table, values, PositionImpl::kDepthwise);
          dw_count = counter.total();
          dw.close(diff(d, e), what);
        }
        std::uint64_t taps_n = 1;
        for (auto w : map.window()) taps_n *= w;
        const std::uint64_t expect = b * n * taps_n * k * v;
        if (want_conv) counts.exact(conv_count == expect, what + " conv count " + std::to_string(conv_count));
        if (want_dw) counts.exact(dw_count == expect, what + " depthwise count " + std::to_string(dw_count));
        if (want_conv && want_dw) bits.exact(c == d, what);

        for (auto impl : {PositionImpl::kConv, PositionImpl::kDepthwise}) {
          if ((impl == PositionImpl::kConv && !want_conv) || (impl == PositionImpl::kDepthwise && !want_dw)) continue;
          LambdaConfig cfg;
          cfg.d_in = 3;
          cfg.k = k;
          cfg.h = 2;
          cfg.d_out = 2 * v;
          cfg.position = pos;
          const auto params = init_params(cfg, opt.seed + index);
          CounterRng xr(opt.seed + index, Stream::kData, 1);
          const auto x = random_normal({b, n, cfg.d_in}, xr);
          const auto ye = lambda_layer_forward(x, x, params, cfg);
          cfg.impl = impl;
          layer.close(diff(lambda_layer_forward(x, x, params, cfg), ye), what + " impl=" + to_string(impl));
        }
      }
    }
  }
  const std::string covered = "seq 1..6 and grids up to 6x6, scopes {1,3,5}, clamped and circular";
  if (want_conv) rep.properties.push_back(conv.done(covered));
  if (want_dw) rep.properties.push_back(dw.done(covered));
  rep.properties.push_back(taps.done(covered));
  if (want_conv && want_dw) rep.properties.push_back(bits.done(covered));
  rep.properties.push_back(layer.done(covered));
  rep.properties.push_back(counts.done("b * n * taps * k * v, equal for conv and depthwise"));
  return rep;
}

// ---------------------------------------------------------------------------

// R for a clamped, unscoped prefix of length `len` cut from the table of a
// sequence of length `n`.
Tensor slice_clamped_table(const Tensor& r, std::size_t n, std::size_t len) {
  const std::size_t k = r.extent(1), rows = 2 * len - 1, start = n - len;
  Tensor out({rows, k});
  for (std::size_t i = 0; i < rows * k; ++i) out[i] = r[start * k + i];
  return out;
}

Tensor prefix(const Tensor& t, std::size_t len) {
  const std::size_t b = t.extent(0), n = t.extent(1), d = t.extent(2);
  Tensor out({b, len, d});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < len * d; ++j) out[i * len * d + j] = t[i * n * d + j];
  }
  return out;
}

SuiteReport masked_suite(const SuiteOptions& opt) {
  SuiteReport rep{"masked", {}};
  Prop future("causal-future-perturbation-bits", 0.0), trunc("causal-prefix-truncation", 1e-12);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t rep_i = 0; rep_i < 6; ++rep_i) {
      const std::uint64_t index = n * 100 + rep_i;
      CounterRng rng(opt.seed, Stream::kShapes, 50000 + index);
      LambdaConfig c;
      c.d_in = pick(rng, 1, 4);
      c.k = pick(rng, 1, 4);
      c.h = pick(rng, 1, 3);
      c.d_out = c.h * pick(rng, 1, 3);
      c.position.geometry = Geometry::seq(n);
      c.key_norm = static_cast<KeyNorm>(rng.below(3));
      c.interactions = static_cast<Interactions>(rng.below(3));
      c.qv_hook = rng.below(2) == 1;
      auto params = init_params(c, opt.seed + index);
      if (c.qv_hook) randomize_hook(params, opt.seed + index);
      const std::size_t b = pick(rng, 1, 3);
      CounterRng xr(opt.seed + index, Stream::kData, 0);
      const auto x = random_normal({b, n, c.d_in}, xr);
      const auto mask = MaskSpec::causal(n);
      const auto y = masked_lambda_forward(x, x, params, c, mask);
      const std::string what = describe(c, b);
      const std::size_t dout = c.d_out;

      for (std::size_t q = 0; q < n; ++q) {
        // Perturb every position after q.
        Tensor xp = x;
        CounterRng pr(opt.seed + index, Stream::kData, 2 + q);
        for (std::size_t bi = 0; bi < b; ++bi) {
          for (std::size_t j = q + 1; j < n; ++j) {
            for (std::size_t d = 0; d < c.d_in; ++d) xp[(bi * n + j) * c.d_in + d] += 3.0 * pr.normal();
          }
        }
        const auto yp = masked_lambda_forward(xp, xp, params, c, mask);
        bool equal = true;
        for (std::size_t bi = 0; bi < b; ++bi) {
          for (std::size_t j = 0; j < dout; ++j) {
            const std::size_t at = (bi * n + q) * dout + j;
            equal = equal && y[at] == yp[at];
          }
        }
        future.exact(equal, what + " query " + std::to_string(q));

        // Oracle: the unmasked layer on the prefix ending at q.
        const std::size_t len = q + 1;
        LambdaConfig tc = c;
        tc.position.geometry = Geometry::seq(len);
        LambdaParams tp = params;
        if (c.uses_position()) tp.r = slice_clamped_table(params.r, n, len);
        const auto xt = prefix(x, len);
        const auto yt = lambda_layer_forward(xt, xt, tp, tc);
        double err = 0.0;
        for (std::size_t bi = 0; bi < b; ++bi) {
          for (std::size_t j = 0; j < dout; ++j) {
            err = std::max(err, std::abs(y[(bi * n + q) * dout + j] - yt[(bi * len + q) * dout + j]));
          }
        }
        trunc.close(err, what + " query " + std::to_string(q));
      }
    }
  }
  rep.properties.push_back(future.done("seq 1..6, every query, context after the query perturbed"));
  rep.properties.push_back(trunc.done("seq 1..6, every query n <= 5 against the unmasked layer on the prefix"));

  // Transient memory: nothing of size b*h*n*m may be allocated.
  Prop alloc("no-quadratic-materialization", 0.0);
  {
    LambdaConfig c;
    c.d_in = 4;
    c.k = 4;
    c.h = 8;
    c.d_out = 16;
    c.position.geometry = Geometry::seq(64);
    const std::size_t b = 4, n = 64, m = 64, k = c.k, v = c.v(), h = c.h;
    const auto params = init_params(c, opt.seed);
    CounterRng xr(opt.seed, Stream::kData, 0);
    const auto x = random_normal({b, n, c.d_in}, xr);
    const auto mask = MaskSpec::causal(n);
    memory::Scope scope;
    const auto y = masked_lambda_forward(x, x, params, c, mask);
    const std::int64_t quadratic = static_cast<std::int64_t>(8 * b * h * n * m);
    // Budget: per-query lambdas, masked embeddings, plus the projected inputs
    // and output, each of which is linear in n.
    const std::int64_t budget =
        static_cast<std::int64_t>(8 * (2 * b * n * k * v + 2 * k * n * m + 2 * b * n * h * k + 2 * b * n * h * v +
                                       2 * b * m * (k + v) + m));
    const auto peak = scope.peak_transient_bytes(), largest = scope.largest_allocation();
    const std::string msg = "peak " + std::to_string(peak) + " B within budget " + std::to_string(budget) +
                            " B, largest allocation " + std::to_string(largest) + " B, a b*h*n*m array is " +
                            std::to_string(quadratic) + " B";
    alloc.exact(largest < quadratic && peak <= budget, msg);
    rep.properties.push_back(alloc.done(msg));
  }

  Prop zero("masked-context-grad-zero", 0.0);
  for (std::size_t i = 0; i < 20; ++i) {
    auto lc = make_case(Variant::kMasked, opt.seed, 60000 + i, CaseLimits{});
    const std::size_t n = lc.x.extent(1);
    if (n < 2) continue;
    // Hide the last context position from every query.
    Tensor mask = random_mask(n, opt.seed, 60000 + i);
    for (std::size_t q = 0; q < n; ++q) {
      mask[q * n + n - 1] = 0.0;
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) any = any || mask[q * n + j] != 0.0;
      if (!any) mask[q * n] = 1.0;
    }
    lc.mask = MaskSpec{mask};
    const auto up = random_functional({lc.b, n, lc.config.d_out}, opt.seed + i);
    const auto g = backward(Variant::kMasked, lc.x, lc.context, lc.params, lc.config, up, lc.mask_ptr());
    bool zeros = true;
    for (std::size_t bi = 0; bi < lc.b; ++bi) {
      for (std::size_t d = 0; d < lc.config.d_in; ++d) zeros = zeros && g.context[(bi * n + n - 1) * lc.config.d_in + d] == 0.0;
    }
    zero.exact(zeros, lc.label);
  }
  rep.properties.push_back(zero.done("context position hidden from all queries gets an exactly zero gradient"));
  return rep;
}

// ---------------------------------------------------------------------------

struct GradPlan {
  std::string name;
  Variant variant;
  std::optional<PositionImpl> impl;
  std::optional<bool> scoped;
  std::size_t u = 0;  // 0 = variant default
};

SuiteReport gradients_suite(const SuiteOptions& opt) {
  SuiteReport rep{"gradients", {}};
  const std::vector<GradPlan> plans = {
      {"global", Variant::kGlobal, PositionImpl::kEinsum, false, 1},
      {"scoped-einsum", Variant::kGlobal, PositionImpl::kEinsum, true, 1},
      {"conv", Variant::kGlobal, PositionImpl::kConv, true, 1},
      {"depthwise", Variant::kGlobal, PositionImpl::kDepthwise, true, 1},
      {"masked-causal", Variant::kMasked, PositionImpl::kEinsum, std::nullopt, 1},
      {"multihead", Variant::kMultihead, PositionImpl::kEinsum, std::nullopt, 1},
      {"intra-depth-u1", Variant::kIntraDepth, std::nullopt, std::nullopt, 1},
      {"intra-depth-u2", Variant::kIntraDepth, std::nullopt, std::nullopt, 2},
      {"intra-depth-u3", Variant::kIntraDepth, std::nullopt, std::nullopt, 3},
      {"content-only", Variant::kContentOnly, PositionImpl::kEinsum, std::nullopt, 1},
  };
  const CaseLimits lim{4, 3, true};
  std::uint64_t index = 0;
  for (const auto& plan : plans) {
    Prop p("fd-" + plan.name, 1e-6);
    for (std::size_t i = 0; i < 20; ++i, ++index) {
      auto lc = make_case(plan.variant, opt.seed, 70000 + index, lim, plan.impl, plan.scoped);
      auto& c = lc.config;
      if (plan.variant == Variant::kIntraDepth) {
        c.u = plan.u;
        if (c.u > 1 && c.impl == PositionImpl::kDepthwise) c.impl = PositionImpl::kConv;
      }
      if (plan.variant == Variant::kMasked) c.position.scope.reset();
      // With one input channel, L2 keys do not depend on the scale of W_K, so
      // its true gradient is identically zero and finite differences only see
      // roundoff. That case is covered by l2-scale-invariance below.
      if (c.key_norm == KeyNorm::kL2 && c.d_in == 1) c.d_in = 2;
      const auto report = gradient_check(plan.variant, c, lc.b, opt.seed + index);
      std::string worst;
      double worst_err = -1.0;
      for (const auto& e : report.entries) {
        if (e.max_rel_error > worst_err) {
          worst_err = e.max_rel_error;
          worst = e.name + "[" + std::to_string(e.worst_index) + "] analytic " + fmt(e.worst_analytic) + " numeric " +
                  fmt(e.worst_numeric);
        }
      }
      p.close(report.max_rel_error(), describe(c, lc.b) + " worst " + worst);
    }
    rep.properties.push_back(p.done("20 seeded cases, central differences with step 1e-5"));
  }

  Prop inv("l2-scale-invariance", 1e-12);
  for (std::size_t i = 0; i < 20; ++i) {
    const Variant variant = i % 2 == 0 ? Variant::kGlobal : Variant::kMultihead;
    auto lc = make_case(variant, opt.seed, 78000 + i, lim, PositionImpl::kEinsum);
    auto& c = lc.config;
    c.d_in = 1;
    c.key_norm = KeyNorm::kL2;
    if (c.interactions == Interactions::kPositionOnly) c.interactions = Interactions::kBoth;
    lc.params = init_variant_params(variant, c, opt.seed + i);
    CounterRng xr(opt.seed + i, Stream::kData, 0);
    lc.x = random_normal({lc.b, lc.x.extent(1), 1}, xr);
    lc.context = random_normal({lc.b, lc.x.extent(1), 1}, xr);
    const auto up = random_functional({lc.b, lc.x.extent(1), c.d_out}, opt.seed + i);
    const auto g = backward(variant, lc.x, lc.context, lc.params, c, up);
    const double scale = std::max({1.0, max_abs(g.w_q), max_abs(g.w_v)});
    inv.close(max_abs(g.w_k) / scale, to_string(variant) + " " + describe(c, lc.b));
  }
  rep.properties.push_back(inv.done("d_in = 1 with L2 keys: analytic W_K gradient is zero to roundoff"));

  Prop add("additive-grad-decomposition", 1e-12);
  for (std::size_t i = 0; i < 20; ++i) {
    auto lc = make_case(Variant::kGlobal, opt.seed, 79000 + i, lim);
    auto& c = lc.config;
    c.qv_hook = false;
    const auto up = random_functional({lc.b, lc.x.extent(1), c.d_out}, opt.seed + i);
    auto run = [&](Interactions mode) {
      c.interactions = mode;
      return backward(Variant::kGlobal, lc.x, lc.context, lc.params, c, up);
    };
    const auto full = run(Interactions::kBoth), gc = run(Interactions::kContentOnly),
               gp = run(Interactions::kPositionOnly);
    double err = 0.0;
    const std::pair<const Tensor*, std::pair<const Tensor*, const Tensor*>> pairs[] = {
        {&full.x, {&gc.x, &gp.x}},       {&full.context, {&gc.context, &gp.context}},
        {&full.w_q, {&gc.w_q, &gp.w_q}}, {&full.w_k, {&gc.w_k, &gp.w_k}},
        {&full.w_v, {&gc.w_v, &gp.w_v}}, {&full.r, {&gc.r, &gp.r}}};
    for (const auto& [f, parts] : pairs) err = std::max(err, diff(*f, lambdanet::add(*parts.first, *parts.second)));
    add.close(err, lc.label);
  }
  rep.properties.push_back(add.done("grad(full) == grad(content-only) + grad(position-only), hook off"));
  return rep;
}

// ---------------------------------------------------------------------------

// Moves every position p of a [b, n, c] tensor to p + shift (mod extent) per axis.
Tensor roll(const Tensor& t, const Geometry& g, const std::vector<std::size_t>& shift) {
  const std::size_t b = t.extent(0), n = t.extent(1), c = t.extent(2);
  Tensor out({b, n, c});
  for (std::size_t p = 0; p < n; ++p) {
    auto co = g.coords(p);
    std::size_t dst = 0;
    for (std::size_t a = 0; a < g.axes(); ++a) dst = dst * g.dims[a] + (co[a] + shift[a]) % g.dims[a];
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t j = 0; j < c; ++j) out[(bi * n + dst) * c + j] = t[(bi * n + p) * c + j];
    }
  }
  return out;
}

SuiteReport equivariance_suite(const SuiteOptions& opt) {
  SuiteReport rep{"equivariance", {}};
  Prop circ("circular-layer-shift", 1e-12);
  for (std::size_t i = 0; i < 60; ++i) {
    CounterRng rng(opt.seed, Stream::kShapes, 80000 + i);
    auto lc = make_case(Variant::kGlobal, opt.seed, 80000 + i, CaseLimits{6, 4, true});
    auto& c = lc.config;
    c.position.boundary = Boundary::kCircular;
    if (c.position.scope) {
      for (std::size_t a = 0; a < c.position.geometry.axes(); ++a) {
        auto& s = (*c.position.scope)[a];
        s = std::min(s, max_scope(c.position.geometry.dims[a], Boundary::kCircular));
      }
    } else {
      c.impl = PositionImpl::kEinsum;
    }
    lc.params = init_params(c, opt.seed + i);
    std::vector<std::size_t> shift;
    for (auto n : c.position.geometry.dims) shift.push_back(rng.below(n));
    const auto& g = c.position.geometry;
    const auto y = lambda_layer_forward(lc.x, lc.context, lc.params, c);
    const auto ys = lambda_layer_forward(roll(lc.x, g, shift), roll(lc.context, g, shift), lc.params, c);
    circ.close(diff(ys, roll(y, g, shift)), describe(c, lc.b));
  }
  rep.properties.push_back(circ.done("60 circular seq/grid layers, random shifts, all position paths"));

  // Clamped conv: positions whose window stays inside the geometry before and
  // after the shift see identical taps.
  Prop interior("clamped-conv-interior-bits", 0.0);
  std::size_t checked = 0;
  std::uint64_t index = 0;
  for (const bool grid : {false, true}) {
    for (std::size_t extent = 3; extent <= (grid ? 6u : 12u); ++extent) {
      for (std::size_t s : {1, 3, 5}) {
        if (s > extent) continue;
        ++index;
        const Geometry g = grid ? Geometry::grid(extent, extent - 1) : Geometry::seq(extent);
        const auto map = RelIndexMap::build(PositionSpec{g, Boundary::kClamped, Scope(g.axes(), s)});
        const std::size_t b = 2, k = 2, v = 3, n = g.size();
        CounterRng tr(opt.seed + index, Stream::kParams, 3), vr(opt.seed + index, Stream::kData, 0);
        const auto table = random_normal({map.num_buckets(), k}, tr);
        const auto values = random_normal({b, n, v}, vr);
        const long half = static_cast<long>(s - 1) / 2;
        for (auto impl : {PositionImpl::kConv, PositionImpl::kDepthwise}) {
          const auto base = position_lambdas(map, table, values, impl);
          for (long t = 1; t <= 2; ++t) {
            // Shift along the last axis: V'[p] = V[p - t], fresh values where p - t falls outside.
            Tensor shifted = random_normal({b, n, v}, vr);
            const std::size_t last = g.axes() - 1;
            for (std::size_t p = 0; p < n; ++p) {
              auto co = g.coords(p);
              if (static_cast<long>(co[last]) - t < 0) continue;
              const std::size_t src = p - static_cast<std::size_t>(t);
              for (std::size_t bi = 0; bi < b; ++bi) {
                for (std::size_t j = 0; j < v; ++j) shifted[(bi * n + p) * v + j] = values[(bi * n + src) * v + j];
              }
            }
            const auto moved = position_lambdas(map, table, shifted, impl);
            for (std::size_t p = 0; p < n; ++p) {
              auto co = g.coords(p);
              bool inside = true;
              for (std::size_t a = 0; a < g.axes(); ++a) {
                const long lo = static_cast<long>(co[a]) - half;
                long hi = static_cast<long>(co[a]) + half;
                if (a == last) hi += t;
                inside = inside && lo >= 0 && hi < static_cast<long>(g.dims[a]);
              }
              if (!inside) continue;
              const std::size_t q = p + static_cast<std::size_t>(t);
              bool eq = true;
              for (std::size_t bi = 0; bi < b; ++bi) {
                for (std::size_t j = 0; j < k * v; ++j) {
                  eq = eq && base[(bi * n + p) * k * v + j] == moved[(bi * n + q) * k * v + j];
                }
              }
              ++checked;
              interior.exact(eq, "geom=" + g.str() + " scope=" + std::to_string(s) + " impl=" + to_string(impl) +
                                     " position " + std::to_string(p) + " shift " + std::to_string(t));
            }
          }
        }
      }
    }
  }
  rep.properties.push_back(interior.done(std::to_string(checked) +
                                         " interior positions; boundary windows read zero padding and are excluded"));
  return rep;
}

// ---------------------------------------------------------------------------

SuiteReport relpos_suite(const SuiteOptions& opt) {
  SuiteReport rep{"relpos", {}};
  Prop clamped("clamped-shift-table", 0.0), circular("circular-shift-table", 0.0);
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto map = RelIndexMap::build(PositionSpec{Geometry::seq(n), Boundary::kClamped, std::nullopt});
    bool ok = true;
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t q = 0; q + t < n; ++q) {
        for (std::size_t m = 0; m + t < n; ++m) ok = ok && map.bucket(q, m) == map.bucket(q + t, m + t);
      }
    }
    clamped.exact(ok, "seq:" + std::to_string(n));
  }
  std::vector<Geometry> geoms;
  for (std::size_t n = 1; n <= 8; ++n) geoms.push_back(Geometry::seq(n));
  for (std::size_t hh = 1; hh <= 4; ++hh) {
    for (std::size_t ww = 1; ww <= 4; ++ww) geoms.push_back(Geometry::grid(hh, ww));
  }
  for (const auto& g : geoms) {
    const auto map = RelIndexMap::build(PositionSpec{g, Boundary::kCircular, std::nullopt});
    const std::size_t n = g.size();
    bool ok = true;
    // Every translation of the torus.
    for (std::size_t t = 0; t < n; ++t) {
      const auto tc = g.coords(t);
      auto move = [&](std::size_t p) {
        auto co = g.coords(p);
        std::size_t out = 0;
        for (std::size_t a = 0; a < g.axes(); ++a) out = out * g.dims[a] + (co[a] + tc[a]) % g.dims[a];
        return out;
      };
      for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t m = 0; m < n; ++m) ok = ok && map.bucket(move(q), move(m)) == map.bucket(q, m);
      }
    }
    circular.exact(ok, g.str());
  }
  rep.properties.push_back(clamped.done("exhaustive over seq n <= 8 and all shifts"));
  rep.properties.push_back(circular.done("exhaustive over seq n <= 8 and grids up to 4x4"));

  // A scoped table equals the unscoped expansion with far displacements zeroed.
  Prop scoped("scope-equals-zeroed-expansion", 0.0);
  std::uint64_t index = 0;
  for (const auto& g : geoms) {
    for (auto boundary : {Boundary::kClamped, Boundary::kCircular}) {
      for (std::size_t s = 1; s <= 7; s += 2) {
        bool valid = true;
        for (auto n : g.dims) valid = valid && s <= max_scope(n, boundary);
        if (!valid) continue;
        ++index;
        const auto full = RelIndexMap::build(PositionSpec{g, boundary, std::nullopt});
        const auto part = RelIndexMap::build(PositionSpec{g, boundary, Scope(g.axes(), s)});
        const std::size_t k = 2;
        CounterRng rng(opt.seed + index, Stream::kParams, 3);
        const auto r_full = random_normal({full.num_buckets(), k}, rng);
        // Scoped bucket j per axis is displacement j - half; copy the matching
        // unscoped row.
        Tensor r_part({part.num_buckets(), k});
        const long half = static_cast<long>(s - 1) / 2;
        for (std::size_t j = 0; j < part.num_buckets(); ++j) {
          std::size_t rem = j, src = 0, stride = 1;
          for (std::size_t a = g.axes(); a-- > 0;) {
            const long N = static_cast<long>(g.dims[a]);
            const long disp = static_cast<long>(rem % s) - half;
            rem /= s;
            const long ext = boundary == Boundary::kClamped ? 2 * N - 1 : N;
            const long idx = boundary == Boundary::kClamped ? disp + N - 1 : ((disp % N) + N) % N;
            src += static_cast<std::size_t>(idx) * stride;
            stride *= static_cast<std::size_t>(ext);
          }
          for (std::size_t c = 0; c < k; ++c) r_part[j * k + c] = r_full[src * k + c];
        }
        auto expect = expand_embeddings(full, r_full);
        const std::size_t n = g.size();
        for (std::size_t q = 0; q < n; ++q) {
          const auto qc = g.coords(q);
          for (std::size_t m = 0; m < n; ++m) {
            const auto mc = g.coords(m);
            bool far = false;
            for (std::size_t a = 0; a < g.axes(); ++a) {
              const long N = static_cast<long>(g.dims[a]);
              long d = static_cast<long>(mc[a]) - static_cast<long>(qc[a]);
              if (boundary == Boundary::kCircular) {
                d = ((d % N) + N) % N;
                d = std::min(d, N - d);
              }
              far = far || std::abs(d) > half;
            }
            if (far) {
              for (std::size_t c = 0; c < k; ++c) expect[(q * n + m) * k + c] = 0.0;
            }
          }
        }
        scoped.exact(same(expand_embeddings(part, r_part), expect),
                     g.str() + " " + to_string(boundary) + " scope " + std::to_string(s));
      }
    }
  }
  rep.properties.push_back(scoped.done("seq n <= 8, grids up to 4x4, scopes 1..7, both boundaries"));

  Prop shared("shared-table", 0.0);
  {
    LambdaConfig a;
    a.d_in = 3;
    a.k = 4;
    a.h = 2;
    a.d_out = 4;
    a.position.geometry = Geometry::grid(3, 4);
    LambdaConfig b = a;
    b.d_in = 5;
    b.h = 1;
    const auto map = RelIndexMap::build(a.position);
    const auto table = init_params(a, opt.seed).r;
    shared.exact(same(expand_embeddings(map, table), expand_embeddings(RelIndexMap::build(b.position), table)),
                 "grid:3x4");
  }
  rep.properties.push_back(shared.done("two layers holding one table expand to identical E"));
  return rep;
}

// ---------------------------------------------------------------------------

SuiteReport contract_suite(const SuiteOptions& opt) {
  SuiteReport rep{"contract", {}};
  const char* specs[] = {"bmk,bmv->bkv",     "nmk,bmv->bnkv",     "bhnk,bkv->bnhv",   "bhnk,bnkv->bnhv",
                         "bmkv,nm->bnkv",    "knm,nm->knm",       "bhmk,bhmv->bhkv",  "hnmk,bhmv->bnhkv",
                         "bmku,bmvu->bkv",   "knmu,bmvu->bnkv",   "nmk,nm->nmk",      "bnkv,bmv->nmk",
                         "nmk,bnkv->bmv",    "bnd,de->bne",       "bhnk,bhmk->bhnm",  "bhnm,bhmv->bhnv"};
  Prop oracle("specs-vs-loop-oracle", 1e-12), bits("specialized-vs-generic-bits", 0.0), lin("linearity", 1e-12);
  std::uint64_t index = 0;
  for (const char* spec : specs) {
    const auto parsed = ContractionSpec::parse(spec);
    for (std::size_t trial = 0; trial < 12; ++trial, ++index) {
      CounterRng rng(opt.seed, Stream::kShapes, 90000 + index);
      std::map<char, std::size_t> ext;
      for (const auto& in : parsed.inputs) {
        for (char c : in) {
          if (!ext.count(c)) ext[c] = pick(rng, 1, 5);
        }
      }
      std::vector<Tensor> ops;
      CounterRng dr(opt.seed + index, Stream::kData, 0);
      for (const auto& in : parsed.inputs) {
        Shape s;
        for (char c : in) s.push_back(ext[c]);
        ops.push_back(random_normal(s, dr));
      }
      const auto got = contract<double>(spec, ops[0], ops[1]);
      const auto expect = reference::einsum(spec, {&ops[0], &ops[1]});
      std::string what = std::string(spec) + " extents";
      for (const auto& [c, e] : ext) what += " " + std::string(1, c) + "=" + std::to_string(e);
      oracle.close(diff(got, expect), what);
      if (has_specialized_kernel(spec)) {
        bits.exact(got == contract<double>(spec, ops[0], ops[1], ContractPath::kGeneric), what);
      }
      const auto extra = random_normal(ops[0].shape(), dr);
      const auto lhs = contract<double>(spec, lambdanet::add(ops[0], extra), ops[1]);
      const auto rhs = lambdanet::add(got, contract<double>(spec, extra, ops[1]));
      lin.close(diff(lhs, rhs), what);
    }
  }
  rep.properties.push_back(oracle.done("16 specs x 12 random extent sets <= 5"));
  rep.properties.push_back(bits.done("hand-written kernels match the generic engine bit for bit"));
  rep.properties.push_back(lin.done("contract(A + A', B) == contract(A, B) + contract(A', B)"));

  Prop sums("softmax-sums-to-one", 1e-12), shift("softmax-shift-invariance", 1e-12);
  for (std::size_t i = 0; i < 40; ++i) {
    CounterRng rng(opt.seed, Stream::kShapes, 95000 + i);
    const Shape s{pick(rng, 1, 5), pick(rng, 1, 5), pick(rng, 1, 5)};
    const std::size_t axis = rng.below(3);
    CounterRng dr(opt.seed + i, Stream::kData, 0);
    const auto t = random_normal(s, dr, 4.0);
    const auto y = softmax(t, axis);
    Shape keep = s;
    keep[axis] = 1;
    const auto strides = t.strides();
    double err = 0.0;
    for (std::size_t o = 0; o < num_elements(keep); ++o) {
      std::size_t rem = o, base = 0;
      for (std::size_t a = 3; a-- > 0;) {
        base += (rem % keep[a]) * strides[a];
        rem /= keep[a];
      }
      double total = 0.0;
      for (std::size_t j = 0; j < s[axis]; ++j) total += y[base + j * strides[axis]];
      err = std::max(err, std::abs(total - 1.0));
    }
    sums.close(err, "shape " + to_string(s) + " axis " + std::to_string(axis));
    // Same constant added to every slice.
    const double c = rng.uniform(-20.0, 20.0);
    Tensor moved = t;
    for (auto& x : moved.data()) x += c;
    shift.close(diff(softmax(moved, axis), y), "shape " + to_string(s) + " shift " + fmt(c));
  }
  rep.properties.push_back(sums.done("40 random tensors, every axis"));
  rep.properties.push_back(shift.done("40 random tensors, constant shifts in [-20, 20]"));
  return rep;
}

// ---------------------------------------------------------------------------

bool terms_match(const cost::Counter& counter, const ComplexityReport& model, std::string& why) {
  if (counter.layer_total() != model.multiplies) {
    why = "counted " + std::to_string(counter.layer_total()) + " vs model " + std::to_string(model.multiplies);
    return false;
  }
  for (const auto& [label, count] : model.terms) {
    if (counter.get(label) != count) {
      why = label + ": counted " + std::to_string(counter.get(label)) + " vs model " + std::to_string(count);
      return false;
    }
  }
  return true;
}

SuiteReport complexity_suite(const SuiteOptions& opt) {
  SuiteReport rep{"complexity", {}};
  std::map<OpKind, Prop> props;
  for (auto op : all_op_kinds()) {
    if (op == OpKind::kLocalAttention) continue;
    props.emplace(op, Prop("time-cost-" + to_string(op), 0.0));
  }
  auto check = [&](OpKind op, const DimSet& dims, const cost::Counter& counter, const std::string& what) {
    std::string why;
    const bool ok = terms_match(counter, time_cost(op, dims), why);
    props.at(op).exact(ok, what + " " + why);
  };

  std::uint64_t index = 0;
  for (std::size_t b = 1; b <= 4; ++b) {
    for (std::size_t n = 1; n <= 4; ++n) {
      for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t v = 1; v <= 4; ++v) {
          for (std::size_t h = 1; h <= 4; ++h, ++index) {
            const std::string what = "b=" + std::to_string(b) + " n=" + std::to_string(n) + " k=" + std::to_string(k) +
                                     " v=" + std::to_string(v) + " h=" + std::to_string(h);
            DimSet dims;
            dims.b = b;
            dims.n = n;
            dims.m = n;
            dims.k = k;
            dims.v = v;
            dims.h = h;
            LambdaConfig c;
            c.d_in = 2;
            c.k = k;
            c.h = h;
            c.d_out = h * v;
            c.position.geometry = Geometry::seq(n);
            CounterRng xr(opt.seed + index, Stream::kData, 0);
            const auto x = random_normal({b, n, 2}, xr);
            const auto params = init_params(c, opt.seed + index);
            {
              cost::Counter counter;
              lambda_layer_forward(x, x, params, c);
              check(OpKind::kLambda, dims, counter, what);
              check(OpKind::kLambdaSharedEmbeddings, dims, counter, what);
            }
            {
              cost::Counter counter;
              content_only_forward(x, x, params, c);
              check(OpKind::kContentOnlyLambda, dims, counter, what);
            }
            {
              cost::Counter counter;
              masked_lambda_forward(x, x, params, c, MaskSpec::causal(n));
              check(OpKind::kMaskedLambda, dims, counter, what);
            }
            {
              const auto mh = init_multihead_params(c, opt.seed + index);
              cost::Counter counter;
              multihead_lambda_forward(x, x, mh, c);
              check(OpKind::kMultiheadLambda, dims, counter, what);
            }
            for (std::size_t u = 1; u <= 4; ++u) {
              LambdaConfig cu = c;
              cu.u = u;
              const auto pu = init_params(cu, opt.seed + index);
              cost::Counter counter;
              intra_depth_forward(x, x, pu, cu);
              DimSet du = dims;
              du.u = u;
              check(OpKind::kIntraDepthLambda, du, counter, what + " u=" + std::to_string(u));
            }
            for (std::size_t r = 1; r <= 2 * n - 1; r += 2) {
              for (std::size_t u = 1; u <= 2; ++u) {
                for (auto impl : {PositionImpl::kConv, PositionImpl::kDepthwise}) {
                  if (impl == PositionImpl::kDepthwise && u > 1) continue;
                  LambdaConfig cc = c;
                  cc.u = u;
                  cc.impl = impl;
                  cc.position.scope = Scope{r};
                  const auto pc = init_params(cc, opt.seed + index);
                  cost::Counter counter;
                  if (u == 1) {
                    lambda_layer_forward(x, x, pc, cc);
                  } else {
                    intra_depth_forward(x, x, pc, cc);
                  }
                  DimSet dc = dims;
                  dc.r = r;
                  dc.u = u;
                  check(OpKind::kLambdaConv, dc, counter,
                        what + " r=" + std::to_string(r) + " u=" + std::to_string(u) + " impl=" + to_string(impl));
                }
              }
            }
            {
              CounterRng ar(opt.seed + index, Stream::kData, 3);
              const auto q = random_normal({b, h, n, k}, ar), kk = random_normal({b, h, n, k}, ar),
                         vv = random_normal({b, h, n, v}, ar), e = random_normal({n, n, k}, ar);
              {
                cost::Counter counter;
                attention_forward(q, kk, vv);
                check(OpKind::kAttention, dims, counter, what);
              }
              {
                cost::Counter counter;
                attention_forward(q, kk, vv, &e);
                check(OpKind::kRelativeAttention, dims, counter, what);
              }
              {
                cost::Counter counter;
                linear_attention_forward(q, kk, vv);
                check(OpKind::kLinearAttention, dims, counter, what);
              }
              // Axial: the grid replaces n.
              for (std::size_t hh = 1; hh <= 4; ++hh) {
                if (n != 1) break;
                for (std::size_t ww = 1; ww <= 4; ++ww) {
                  const std::size_t nn = hh * ww;
                  const auto aq = random_normal({b, h, nn, k}, ar), ak = random_normal({b, h, nn, k}, ar),
                             av = random_normal({b, h, nn, v}, ar);
                  DimSet da = dims;
                  da.height = hh;
                  da.width = ww;
                  cost::Counter counter;
                  axial_attention_forward(aq, ak, av, hh, ww);
                  check(OpKind::kAxialAttention, da, counter,
                        what + " grid=" + std::to_string(hh) + "x" + std::to_string(ww));
                }
              }
            }
          }
        }
      }
    }
  }
  for (auto& [op, p] : props) rep.properties.push_back(p.done("every b, n, k, v, h in 1..4"));

  // Generation work: multi-head over multi-query is exactly h.
  Prop ratio("multihead-generate-ratio-h", 0.0);
  // Fixed d: doubling h halves generation and leaves application unchanged.
  Prop doubling("h-doubling-at-fixed-d", 0.0);
  for (std::size_t b = 1; b <= 4; ++b) {
    for (std::size_t n = 1; n <= 4; ++n) {
      for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t h = 1; h <= 4; ++h) {
          for (std::size_t v = 1; v <= 4; ++v) {
            LambdaConfig c;
            c.d_in = 2;
            c.k = k;
            c.h = h;
            c.d_out = h * v;
            c.position.geometry = Geometry::seq(n);
            CounterRng xr(opt.seed, Stream::kData, b * 1000 + n * 100 + k * 10 + h);
            const auto x = random_normal({b, n, 2}, xr);
            std::uint64_t mq = 0, mh = 0;
            {
              cost::Counter counter;
              lambda_layer_forward(x, x, init_params(c, opt.seed), c);
              mq = counter.get(cost::term::kContent) + counter.get(cost::term::kPosition);
            }
            {
              cost::Counter counter;
              multihead_lambda_forward(x, x, init_multihead_params(c, opt.seed), c);
              mh = counter.get(cost::term::kContent) + counter.get(cost::term::kPosition);
            }
            const std::string what = "b=" + std::to_string(b) + " n=" + std::to_string(n) + " k=" + std::to_string(k) +
                                     " h=" + std::to_string(h) + " v=" + std::to_string(v);
            ratio.exact(mh == h * mq, what + " multihead " + std::to_string(mh) + " multiquery " + std::to_string(mq));
            if (v % 2 == 0) {
              LambdaConfig c2 = c;
              c2.h = 2 * h;
              std::uint64_t gen1 = 0, app1 = 0, gen2 = 0, app2 = 0;
              {
                cost::Counter counter;
                lambda_layer_forward(x, x, init_params(c, opt.seed), c);
                gen1 = counter.get(cost::term::kContent) + counter.get(cost::term::kPosition);
                app1 = counter.get(cost::term::kApply);
              }
              {
                cost::Counter counter;
                lambda_layer_forward(x, x, init_params(c2, opt.seed), c2);
                gen2 = counter.get(cost::term::kContent) + counter.get(cost::term::kPosition);
                app2 = counter.get(cost::term::kApply);
              }
              doubling.exact(2 * gen2 == gen1 && app2 == app1, what);
            }
          }
        }
      }
    }
  }
  rep.properties.push_back(ratio.done("content + position multiplies, every dim in 1..4"));
  rep.properties.push_back(doubling.done("generation halves exactly, application constant at fixed d = h * v"));
  return rep;
}

// ---------------------------------------------------------------------------

SuiteReport collapses_suite(const SuiteOptions& opt) {
  SuiteReport rep{"collapses", {}};
  const CaseLimits lim;
  Prop u1("u1-equals-default-bits", 0.0), h1("h1-multihead-equals-multiquery-bits", 0.0);
  Prop tied("tied-multihead-equals-multiquery", 1e-12), r0("zero-table-equals-content-only-bits", 0.0);
  for (std::size_t i = 0; i < 40; ++i) {
    auto lc = make_case(Variant::kGlobal, opt.seed, 100000 + i, lim);
    auto& c = lc.config;
    c.u = 1;
    u1.exact(same(intra_depth_forward(lc.x, lc.context, lc.params, c),
                  lambda_layer_forward(lc.x, lc.context, lc.params, c)),
             lc.label);

    // Multi-head parameters tied across heads.
    LambdaConfig ce = c;
    ce.impl = PositionImpl::kEinsum;
    const std::size_t d = c.d_in, h = c.h, k = c.k, v = c.v(), rb = lc.params.r.extent(0);
    LambdaParams mh = lc.params;
    mh.w_k = Tensor({d, h * k});
    mh.w_v = Tensor({d, h * v});
    mh.r = Tensor({h, rb, k});
    mh.v_scale = Tensor({h * v});
    mh.v_shift = Tensor({h * v});
    for (std::size_t hi = 0; hi < h; ++hi) {
      for (std::size_t di = 0; di < d; ++di) {
        for (std::size_t j = 0; j < k; ++j) mh.w_k[di * h * k + hi * k + j] = lc.params.w_k[di * k + j];
        for (std::size_t j = 0; j < v; ++j) mh.w_v[di * h * v + hi * v + j] = lc.params.w_v[di * v + j];
      }
      for (std::size_t j = 0; j < rb * k; ++j) mh.r[hi * rb * k + j] = lc.params.r[j];
      for (std::size_t j = 0; j < v; ++j) {
        mh.v_scale[hi * v + j] = lc.params.v_scale[j];
        mh.v_shift[hi * v + j] = lc.params.v_shift[j];
      }
    }
    const auto ymq = lambda_layer_forward(lc.x, lc.context, lc.params, ce);
    const auto ymh = multihead_lambda_forward(lc.x, lc.context, mh, ce);
    if (h == 1) {
      h1.exact(same(ymh, ymq), lc.label);
    }
    tied.close(diff(ymh, ymq), lc.label);

    LambdaParams zero = lc.params;
    for (auto& x : zero.r.data()) x = 0.0;
    LambdaConfig cb = c;
    cb.interactions = Interactions::kBoth;
    LambdaConfig cc = c;
    cc.interactions = Interactions::kContentOnly;
    r0.exact(same(lambda_layer_forward(lc.x, lc.context, zero, cb), lambda_layer_forward(lc.x, lc.context, zero, cc)),
             lc.label);
  }
  // h = 1 cases in their own loop so the property always has coverage.
  for (std::size_t i = 0; i < 20; ++i) {
    auto lc = make_case(Variant::kGlobal, opt.seed, 101000 + i, lim, PositionImpl::kEinsum);
    auto& c = lc.config;
    const std::size_t v = c.v();
    c.h = 1;
    c.d_out = v;
    lc.params = init_params(c, opt.seed + i);
    if (c.qv_hook) randomize_hook(lc.params, opt.seed + i);
    LambdaParams mh = lc.params;
    mh.r = lc.params.r.reshape({1, lc.params.r.extent(0), c.k});
    h1.exact(same(multihead_lambda_forward(lc.x, lc.context, mh, c), lambda_layer_forward(lc.x, lc.context, lc.params, c)),
             describe(c, lc.b));
  }
  rep.properties.push_back(u1.done("intra-depth path with u = 1 against the default layer"));
  rep.properties.push_back(h1.done("h = 1 multi-head with the multi-query parameters"));
  rep.properties.push_back(tied.done("multi-head with keys, values and embeddings tied across heads"));
  rep.properties.push_back(r0.done("R = 0 full layer against content-only"));

  Prop diag("diagonal-lambda-channel-attention", 0.0), scal("scalar-lambda-spatial-attention", 0.0);
  for (std::size_t i = 0; i < 30; ++i) {
    CounterRng rng(opt.seed, Stream::kShapes, 102000 + i);
    const std::size_t b = pick(rng, 1, 4), h = pick(rng, 1, 4), n = pick(rng, 1, 6), k = pick(rng, 1, 6);
    CounterRng dr(opt.seed + i, Stream::kData, 0);
    const auto q = random_normal({b, h, n, k}, dr);
    const auto w = random_normal({b, k}, dr);
    const auto s = random_normal({b, n}, dr);
    const auto lc = diagonal_lambda(w);
    const auto lp = scalar_lambdas(s, k);
    const auto yc = apply_lambdas<double>(q, &lc, nullptr);  // [b, n, h*k]
    const auto yp = apply_lambdas<double>(q, nullptr, &lp);
    bool ok_c = true, ok_p = true;
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t ni = 0; ni < n; ++ni) {
        for (std::size_t hi = 0; hi < h; ++hi) {
          for (std::size_t j = 0; j < k; ++j) {
            const double qv = q[((bi * h + hi) * n + ni) * k + j];
            const std::size_t at = (bi * n + ni) * h * k + hi * k + j;
            ok_c = ok_c && yc[at] == w[bi * k + j] * qv;
            ok_p = ok_p && yp[at] == s[bi * n + ni] * qv;
          }
        }
      }
    }
    const std::string what = "b=" + std::to_string(b) + " h=" + std::to_string(h) + " n=" + std::to_string(n) +
                             " k=" + std::to_string(k);
    diag.exact(ok_c, what);
    scal.exact(ok_p, what);
  }
  rep.properties.push_back(diag.done("y_nk == w_k q_nk"));
  rep.properties.push_back(scal.done("y_nk == w_n q_nk"));

  Prop count("intra-depth-parameter-count", 0.0);
  for (std::size_t k = 1; k <= 6; ++k) {
    for (std::size_t u = 1; u <= 4; ++u) {
      LambdaConfig c;
      c.d_in = 5;
      c.k = k;
      c.u = u;
      c.h = 2;
      c.d_out = 6;
      c.position.geometry = Geometry::grid(3, 2);
      const auto p = init_params(c, opt.seed);
      const std::size_t closed = c.d_in * (c.h * k + k * u + c.v() * u) + num_buckets(c) * k * u;
      count.exact(p.parameter_count() == closed && expected_parameter_count(c) == closed,
                  "k=" + std::to_string(k) + " u=" + std::to_string(u) + " allocated " +
                      std::to_string(p.parameter_count()) + " closed form " + std::to_string(closed));
    }
  }
  rep.properties.push_back(count.done("d (hk + ku + vu) + |r| k u against allocated sizes, k <= 6, u <= 4"));
  return rep;
}

// ---------------------------------------------------------------------------

SuiteReport memory_suite(const SuiteOptions&) {
  SuiteReport rep{"memory", {}};
  const auto report = memory_report(default_stages(), MemoryOptions{});
  auto within = [&](const std::string& prop, const std::string& row, double printed, double tol) {
    Prop p(prop, tol);
    const double got = report.row(row).gib();
    p.close(std::abs(got - printed) / printed, row + " " + fmt(got) + " GiB vs " + fmt(printed));
    rep.properties.push_back(p.done(row + " = " + fmt(got) + " GiB vs printed " + fmt(printed)));
  };
  within("table3-lambda-k16", "lambda layer (k=16)", 1.9, 0.02);
  within("table3-lambda-k8", "lambda layer (k=8)", 0.95, 0.02);
  within("table3-lambda-shared", "lambda layer (shared embeddings)", 0.63, 0.02);
  within("table3-axial-attention", "axial attention", 4.8, 0.02);
  within("table3-global-attention", "global attention", 120.0, 0.15);

  {
    Prop p("single-layer-attention-64", 0.02);
    DimSet d;
    d.b = 128;
    d.h = 8;
    d.n = 64 * 64;
    d.m = 64 * 64;
    const double gib = static_cast<double>(space_cost(OpKind::kAttention, d).bytes) / static_cast<double>(1ULL << 30);
    p.close(std::abs(gib - 64.0) / 64.0, fmt(gib) + " GiB");
    rep.properties.push_back(p.done("b=128, h=8, n=m=64^2, one layer: " + fmt(gib) + " GiB"));
  }

  Prop batch("batch-doubling", 0.0);
  {
    MemoryOptions o2;
    o2.b = 256;
    const auto doubled = memory_report(default_stages(), o2);
    for (const auto& row : report.rows) {
      const auto& other = doubled.row(row.name);
      const bool attention = row.op == OpKind::kAttention || row.op == OpKind::kAxialAttention ||
                             row.op == OpKind::kLocalAttention;
      batch.exact(attention ? other.bytes == 2 * row.bytes : other.bytes == row.bytes, row.name);
    }
  }
  rep.properties.push_back(batch.done("attention rows double with b, lambda rows do not change"));

  Prop additive("stage-additivity", 0.0);
  {
    const auto stages = default_stages();
    for (const auto& row : report.rows) {
      std::uint64_t sum = 0;
      for (const auto& s : row.stage_bytes) sum += s;
      additive.exact(sum == row.bytes, row.name + " stage sum");
    }
    // Unshared rows also add up when each stage is reported alone.
    for (const auto& row : report.rows) {
      if (row.name == "lambda layer (shared embeddings)") continue;
      std::uint64_t sum = 0;
      for (const auto& s : stages.stages) sum += memory_report(StageSpec{{s}}, MemoryOptions{}).row(row.name).bytes;
      additive.exact(sum == row.bytes, row.name + " per-stage reports");
    }
  }
  rep.properties.push_back(additive.done("row totals equal the sum of their stages"));

  Prop b_indep("embedding-term-batch-independence", 0.0);
  for (std::uint64_t b = 1; b <= 4; ++b) {
    DimSet d;
    d.b = b;
    d.n = 49;
    d.m = 49;
    d.k = 16;
    d.v = 8;
    d.include_activations = true;
    DimSet d2 = d;
    d2.b = 2 * b;
    const auto a = space_cost(OpKind::kLambda, d), c = space_cost(OpKind::kLambda, d2);
    b_indep.exact(a.terms.at("embeddings") == c.terms.at("embeddings") &&
                      c.terms.at("activations") == 2 * a.terms.at("activations"),
                  "b=" + std::to_string(b));
  }
  rep.properties.push_back(b_indep.done("embeddings independent of b, activations linear in b"));

  Prop reject("zero-layer-stage-rejected", 0.0);
  for (const char* bad : {"0x56", "3x56,0x28", "3x0", ""}) {
    bool threw = false;
    try {
      StageSpec::parse(bad);
    } catch (const ConfigError&) {
      threw = true;
    }
    reject.exact(threw, std::string("'") + bad + "'");
  }
  rep.properties.push_back(reject.done("zero layer counts, zero sides and empty specs raise"));
  return rep;
}

// ---------------------------------------------------------------------------

SuiteReport toy_suite(const SuiteOptions& opt) {
  SuiteReport rep{"toy", {}};
  Prop inv("content-only-logit-invariance", 1e-12), pred("content-only-prediction-constant", 0.0);
  const ToyTaskSpec spec;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto model = init_toy_model(spec, Interactions::kContentOnly, opt.seed + s);
    CounterRng rng(opt.seed + s, Stream::kParams, 20);
    model.w_cls = random_normal(model.w_cls.shape(), rng);
    model.b_cls = random_normal(model.b_cls.shape(), rng);
    std::vector<std::size_t> markers(spec.positions());
    for (std::size_t p = 0; p < markers.size(); ++p) markers[p] = p;
    const auto logits = toy_logits(model, toy_inputs(spec, markers));
    double err = 0.0;
    bool constant = true;
    auto argmax = [&](std::size_t row) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < kToyClasses; ++j) {
        if (logits[row * kToyClasses + j] > logits[row * kToyClasses + best]) best = j;
      }
      return best;
    };
    for (std::size_t p = 1; p < markers.size(); ++p) {
      for (std::size_t j = 0; j < kToyClasses; ++j) {
        err = std::max(err, std::abs(logits[p * kToyClasses + j] - logits[j]));
      }
      constant = constant && argmax(p) == argmax(0);
    }
    inv.close(err, "seed " + std::to_string(opt.seed + s));
    pred.exact(constant, "seed " + std::to_string(opt.seed + s));
  }
  rep.properties.push_back(inv.done("logits for all 64 marker positions, 5 random models"));
  rep.properties.push_back(pred.done("the predicted class is the same for every marker position"));
  return rep;
}

using SuiteFn = std::function<SuiteReport(const SuiteOptions&)>;

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r = {
      {"oracle", oracle_suite},     {"equivalence", equivalence_suite},   {"masked", masked_suite},
      {"gradients", gradients_suite}, {"equivariance", equivariance_suite}, {"relpos", relpos_suite},
      {"contract", contract_suite}, {"complexity", complexity_suite},     {"collapses", collapses_suite},
      {"memory", memory_suite},     {"toy", toy_suite},
  };
  return r;
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.passed; });
}

std::vector<std::string> SuiteReport::failures() const {
  std::vector<std::string> out;
  for (const auto& p : properties) {
    if (!p.passed) out.push_back(suite + "/" + p.name);
  }
  return out;
}

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

SuiteReport run_suite(std::string_view name, const SuiteOptions& options) {
  for (const auto& [n, fn] : registry()) {
    if (n == name) return fn(options);
  }
  throw ConfigError("unknown suite '" + std::string(name) + "'");
}

}  // namespace lambdanet
