// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/reference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lambdanet::reference {
namespace {

// Normalizes the visible entries of a set of key slots; hidden slots are 0.
void normalize(std::vector<double>& vals, const std::vector<bool>& visible, KeyNorm mode) {
  if (mode == KeyNorm::kNone) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!visible[i]) vals[i] = 0.0;
    }
    return;
  }
  if (mode == KeyNorm::kSoftmax) {
    double mx = -INFINITY;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (visible[i]) mx = std::max(mx, vals[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] = visible[i] ? std::exp(vals[i] - mx) : 0.0;
      sum += vals[i];
    }
    for (auto& x : vals) x /= sum;
    return;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (visible[i]) sq += vals[i] * vals[i];
  }
  const double norm = std::sqrt(sq);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = visible[i] && norm > 0.0 ? vals[i] / norm : 0.0;
  }
}

}  // namespace

Tensor layer_forward(Variant variant, const Tensor& x, const Tensor& context, const LambdaParams& params,
                     const LambdaConfig& config, const MaskSpec* mask) {
  config.validate();
  LambdaConfig cfg = config;
  if (variant == Variant::kContentOnly) cfg.interactions = Interactions::kContentOnly;
  if (variant == Variant::kMasked && mask == nullptr) throw ConfigError("the masked variant needs a mask");
  const bool multihead = variant == Variant::kMultihead;
  const bool masked = variant == Variant::kMasked;

  const std::size_t B = x.extent(0), N = x.extent(1), M = context.extent(1), D = x.extent(2);
  const std::size_t H = cfg.h, K = cfg.k, V = cfg.v(), U = cfg.u;
  const std::size_t kv_heads = multihead ? H : 1;
  std::optional<RelIndexMap> map;
  if (cfg.uses_position()) map = RelIndexMap::build(cfg.position);

  auto project = [&](const Tensor& in, std::size_t row, const Tensor& w, std::size_t col) {
    double acc = 0.0;
    for (std::size_t d = 0; d < D; ++d) acc += in[row * D + d] * w[d * w.extent(1) + col];
    return acc;
  };
  auto embedding = [&](std::size_t head, std::size_t n, std::size_t m, std::size_t k, std::size_t u) {
    const int bucket = map->bucket(n, m);
    if (bucket == kOutOfScope) return 0.0;
    const auto r = static_cast<std::size_t>(bucket);
    if (multihead) return params.r[(head * params.r.extent(1) + r) * K + k];
    if (U > 1) return params.r[(r * K + k) * U + u];
    return params.r[r * K + k];
  };

  Tensor y({B, N, H * V});
  for (std::size_t b = 0; b < B; ++b) {
    // Queries [n][h*k] with the hook.
    std::vector<double> q(N * H * K);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t c = 0; c < H * K; ++c) {
        double val = project(x, b * N + n, params.w_q, c);
        if (cfg.qv_hook) val = val * params.q_scale[c] + params.q_shift[c];
        q[n * H * K + c] = val;
      }
    }
    for (std::size_t g = 0; g < kv_heads; ++g) {
      // Keys [m][k][u] and values [m][v][u] of this key/value head.
      std::vector<double> keys(M * K * U), vals(M * V * U);
      for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t u = 0; u < U; ++u) {
            const std::size_t col = multihead ? g * K + k : k * U + u;
            keys[(m * K + k) * U + u] = project(context, b * M + m, params.w_k, col);
          }
        }
        for (std::size_t v = 0; v < V; ++v) {
          for (std::size_t u = 0; u < U; ++u) {
            const std::size_t col = multihead ? g * V + v : v * U + u;
            double val = project(context, b * M + m, params.w_v, col);
            if (cfg.qv_hook) val = val * params.v_scale[col] + params.v_shift[col];
            vals[(m * V + v) * U + u] = val;
          }
        }
      }
      for (std::size_t n = 0; n < N; ++n) {
        std::vector<bool> visible_m(M, true);
        if (masked) {
          for (std::size_t m = 0; m < M; ++m) visible_m[m] = mask->mask[n * M + m] != 0.0;
        }
        // Normalized keys seen by query n.
        std::vector<double> kbar(M * K * U, 0.0);
        if (cfg.uses_content()) {
          for (std::size_t k = 0; k < K; ++k) {
            if (cfg.intra_depth_norm == IntraDepthNorm::kJoint || U == 1) {
              std::vector<double> slot(M * U);
              std::vector<bool> vis(M * U);
              for (std::size_t m = 0; m < M; ++m) {
                for (std::size_t u = 0; u < U; ++u) {
                  slot[m * U + u] = keys[(m * K + k) * U + u];
                  vis[m * U + u] = visible_m[m];
                }
              }
              normalize(slot, vis, cfg.key_norm);
              for (std::size_t m = 0; m < M; ++m) {
                for (std::size_t u = 0; u < U; ++u) kbar[(m * K + k) * U + u] = slot[m * U + u];
              }
            } else {
              for (std::size_t u = 0; u < U; ++u) {
                std::vector<double> slot(M);
                for (std::size_t m = 0; m < M; ++m) slot[m] = keys[(m * K + k) * U + u];
                normalize(slot, visible_m, cfg.key_norm);
                for (std::size_t m = 0; m < M; ++m) kbar[(m * K + k) * U + u] = slot[m];
              }
            }
          }
        }
        // lambda_n [k][v].
        std::vector<double> lambda(K * V, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t v = 0; v < V; ++v) {
            double acc = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
              for (std::size_t u = 0; u < U; ++u) {
                double coeff = kbar[(m * K + k) * U + u];
                if (cfg.uses_position() && visible_m[m]) coeff += embedding(g, n, m, k, u);
                acc += coeff * vals[(m * V + v) * U + u];
              }
            }
            lambda[k * V + v] = acc;
          }
        }
        const std::size_t first = multihead ? g : 0, last = multihead ? g + 1 : H;
        for (std::size_t head = first; head < last; ++head) {
          for (std::size_t v = 0; v < V; ++v) {
            double acc = 0.0;
            for (std::size_t k = 0; k < K; ++k) acc += lambda[k * V + v] * q[n * H * K + head * K + k];
            y[(b * N + n) * H * V + head * V + v] = acc;
          }
        }
      }
    }
  }
  return y;
}

Tensor local_position_lambdas(const RelIndexMap& map, const Tensor& table, const Tensor& values) {
  const std::size_t B = values.extent(0), M = values.extent(1), V = values.extent(2);
  const std::size_t N = map.num_queries(), K = table.extent(1);
  Tensor out({B, N, K, V});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t v = 0; v < V; ++v) {
          double acc = 0.0;
          for (std::size_t m = 0; m < M; ++m) {
            const int bucket = map.bucket(n, m);
            if (bucket == kOutOfScope) continue;
            acc += table[static_cast<std::size_t>(bucket) * K + k] * values[(b * M + m) * V + v];
          }
          out[((b * N + n) * K + k) * V + v] = acc;
        }
      }
    }
  }
  return out;
}

Tensor einsum(std::string_view spec, const std::vector<const Tensor*>& operands) {
  const auto arrow = spec.find("->");
  if (arrow == std::string_view::npos) throw SpecError("einsum spec needs '->'");
  std::vector<std::string> inputs;
  std::string current;
  for (char ch : spec.substr(0, arrow)) {
    if (ch == ',') {
      inputs.push_back(current);
      current.clear();
    } else if (ch != ' ') {
      current += ch;
    }
  }
  inputs.push_back(current);
  const std::string output(spec.substr(arrow + 2));
  if (inputs.size() != operands.size()) throw SpecError("operand count does not match the spec");

  std::map<char, std::size_t> extent;
  std::string labels;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != operands[i]->rank()) throw ShapeError("operand rank does not match the spec");
    for (std::size_t a = 0; a < inputs[i].size(); ++a) {
      const char c = inputs[i][a];
      const auto e = operands[i]->extent(a);
      if (extent.count(c) && extent[c] != e) throw ShapeError(std::string("extent mismatch for ") + c);
      if (!extent.count(c)) labels += c;
      extent[c] = e;
    }
  }
  Shape out_shape;
  for (char c : output) out_shape.push_back(extent.at(c));
  Tensor out(out_shape);

  auto flat = [&](const std::string& axes, const Shape& shape, const std::map<char, std::size_t>& idx) {
    std::size_t f = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) f = f * shape[a] + idx.at(axes[a]);
    return f;
  };
  std::map<char, std::size_t> idx;
  for (char c : labels) idx[c] = 0;
  while (true) {
    double prod = 1.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      prod *= (*operands[i])[flat(inputs[i], operands[i]->shape(), idx)];
    }
    out[flat(output, out_shape, idx)] += prod;
    std::size_t pos = labels.size();
    while (pos > 0) {
      const char c = labels[pos - 1];
      if (++idx[c] < extent[c]) break;
      idx[c] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return out;
}

}  // namespace lambdanet::reference
