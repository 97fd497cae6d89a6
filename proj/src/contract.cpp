// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/contract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "lambdanet/cost.hpp"

namespace lambdanet {

ContractionSpec ContractionSpec::parse(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  const auto arrow = compact.find("->");
  if (arrow == std::string::npos) throw SpecError("contraction '" + compact + "' has no '->'");

  ContractionSpec spec;
  spec.output = compact.substr(arrow + 2);
  const std::string lhs = compact.substr(0, arrow);
  std::size_t start = 0;
  while (true) {
    const auto comma = lhs.find(',', start);
    spec.inputs.push_back(lhs.substr(start, comma == std::string::npos ? comma : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }

  auto check_labels = [&](const std::string& labels, const char* what) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!std::isalpha(static_cast<unsigned char>(labels[i]))) {
        throw SpecError(std::string("invalid label '") + labels[i] + "' in " + what + " of '" +
                        compact + "'");
      }
      if (labels.find(labels[i], i + 1) != std::string::npos) {
        throw SpecError(std::string("repeated label '") + labels[i] + "' in " + what + " of '" +
                        compact + "'");
      }
    }
  };
  for (const auto& in : spec.inputs) check_labels(in, "an operand");
  check_labels(spec.output, "the output");
  for (char c : spec.output) {
    const bool found = std::any_of(spec.inputs.begin(), spec.inputs.end(),
                                   [c](const std::string& in) { return in.find(c) != std::string::npos; });
    if (!found) {
      throw SpecError(std::string("output label '") + c + "' absent from all inputs of '" + compact +
                      "'");
    }
  }
  return spec;
}

std::string ContractionSpec::str() const {
  std::string s;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (i) s += ',';
    s += inputs[i];
  }
  return s + "->" + output;
}

std::string ContractionSpec::summed_labels() const {
  std::string summed;
  for (const auto& in : inputs) {
    for (char c : in) {
      if (output.find(c) == std::string::npos && summed.find(c) == std::string::npos) summed += c;
    }
  }
  return summed;
}

namespace {

using ExtentMap = std::map<char, std::size_t>;

template <class T>
ExtentMap resolve_extents(const ContractionSpec& spec,
                          std::span<const BasicTensor<T>* const> operands) {
  if (operands.size() != spec.inputs.size()) {
    throw SpecError("contraction '" + spec.str() + "' expects " +
                    std::to_string(spec.inputs.size()) + " operands, got " +
                    std::to_string(operands.size()));
  }
  ExtentMap extents;
  for (std::size_t i = 0; i < operands.size(); ++i) {
    const auto& labels = spec.inputs[i];
    const auto& shape = operands[i]->shape();
    if (labels.size() != shape.size()) {
      throw ShapeError("operand " + std::to_string(i) + " of '" + spec.str() + "' has shape " +
                       to_string(shape) + " but labels '" + labels + "'");
    }
    for (std::size_t a = 0; a < labels.size(); ++a) {
      auto [it, inserted] = extents.emplace(labels[a], shape[a]);
      if (!inserted && it->second != shape[a]) {
        throw ShapeError(std::string("label '") + labels[a] + "' has extent " +
                         std::to_string(it->second) + " and " + std::to_string(shape[a]) +
                         " in '" + spec.str() + "'");
      }
    }
  }
  return extents;
}

// Strided loop-nest evaluation of an arbitrary contraction.
template <class T>
BasicTensor<T> generic_contract(const ContractionSpec& spec,
                                std::span<const BasicTensor<T>* const> operands,
                                const ExtentMap& extents) {
  const std::string& out_labels = spec.output;
  const std::string summed = spec.summed_labels();
  const std::size_t n_ops = operands.size();

  Shape out_shape;
  for (char c : out_labels) out_shape.push_back(extents.at(c));
  BasicTensor<T> out(out_shape);

  // stride of each label in each operand (0 when the operand lacks the label)
  auto label_strides = [&](char c) {
    std::vector<std::size_t> s(n_ops, 0);
    for (std::size_t i = 0; i < n_ops; ++i) {
      const auto pos = spec.inputs[i].find(c);
      if (pos != std::string::npos) s[i] = operands[i]->strides()[pos];
    }
    return s;
  };
  std::vector<std::vector<std::size_t>> out_strides, sum_strides;
  std::vector<std::size_t> sum_extents;
  for (char c : out_labels) out_strides.push_back(label_strides(c));
  for (char c : summed) {
    sum_strides.push_back(label_strides(c));
    sum_extents.push_back(extents.at(c));
  }

  std::vector<const T*> base(n_ops);
  for (std::size_t i = 0; i < n_ops; ++i) base[i] = operands[i]->raw();

  const std::size_t r_out = out_labels.size();
  const std::size_t r_sum = summed.size();
  std::vector<std::size_t> out_idx(r_out, 0);
  std::vector<std::size_t> out_off(n_ops, 0);

  std::vector<std::size_t> sum_idx(r_sum, 0);
  std::vector<std::size_t> sum_off(n_ops, 0);
  const std::size_t inner_extent = r_sum ? sum_extents.back() : 1;
  const std::size_t outer_sum_count = r_sum ? num_elements(Shape(sum_extents.begin(), sum_extents.end() - 1)) : 1;

  T* dst = out.raw();
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    T acc{0};
    if (r_sum == 0) {
      T p = base[0][out_off[0]];
      for (std::size_t i = 1; i < n_ops; ++i) p *= base[i][out_off[i]];
      acc += p;
    } else {
      std::fill(sum_idx.begin(), sum_idx.end(), 0);
      std::copy(out_off.begin(), out_off.end(), sum_off.begin());
      const auto& inner = sum_strides.back();
      for (std::size_t outer = 0; outer < outer_sum_count; ++outer) {
        if (n_ops == 2) {
          const T* a = base[0] + sum_off[0];
          const T* b = base[1] + sum_off[1];
          const std::size_t sa = inner[0], sb = inner[1];
          for (std::size_t j = 0; j < inner_extent; ++j) acc += a[j * sa] * b[j * sb];
        } else {
          for (std::size_t j = 0; j < inner_extent; ++j) {
            T p = base[0][sum_off[0] + j * inner[0]];
            for (std::size_t i = 1; i < n_ops; ++i) p *= base[i][sum_off[i] + j * inner[i]];
            acc += p;
          }
        }
        // advance the summed odometer, excluding the innermost label
        for (std::size_t ax = r_sum - 1; ax-- > 0;) {
          if (++sum_idx[ax] < sum_extents[ax]) {
            for (std::size_t i = 0; i < n_ops; ++i) sum_off[i] += sum_strides[ax][i];
            break;
          }
          for (std::size_t i = 0; i < n_ops; ++i) sum_off[i] -= sum_strides[ax][i] * (sum_extents[ax] - 1);
          sum_idx[ax] = 0;
        }
      }
    }
    dst[flat] = acc;

    for (std::size_t ax = r_out; ax-- > 0;) {
      if (++out_idx[ax] < out_shape[ax]) {
        for (std::size_t i = 0; i < n_ops; ++i) out_off[i] += out_strides[ax][i];
        break;
      }
      for (std::size_t i = 0; i < n_ops; ++i) out_off[i] -= out_strides[ax][i] * (out_shape[ax] - 1);
      out_idx[ax] = 0;
    }
  }
  return out;
}

// Hand-written kernels. Each accumulates into the output one product at a
// time with the summed labels visited in the same order as the generic engine,
// which keeps the results bit-identical.

template <class T>
BasicTensor<T> k_project(const BasicTensor<T>& x, const BasicTensor<T>& w) {  // bnd,de->bne
  const std::size_t B = x.extent(0), N = x.extent(1), D = x.extent(2), E = w.extent(1);
  BasicTensor<T> out({B, N, E});
  const T* xp = x.raw();
  const T* wp = w.raw();
  T* op = out.raw();
  for (std::size_t bn = 0; bn < B * N; ++bn) {
    T* row = op + bn * E;
    for (std::size_t d = 0; d < D; ++d) {
      const T xv = xp[bn * D + d];
      const T* wr = wp + d * E;
      for (std::size_t e = 0; e < E; ++e) row[e] += xv * wr[e];
    }
  }
  return out;
}

template <class T>
BasicTensor<T> k_content(const BasicTensor<T>& keys, const BasicTensor<T>& values) {  // bmk,bmv->bkv
  const std::size_t B = keys.extent(0), M = keys.extent(1), K = keys.extent(2), V = values.extent(2);
  BasicTensor<T> out({B, K, V});
  for (std::size_t b = 0; b < B; ++b) {
    T* o = out.raw() + b * K * V;
    for (std::size_t m = 0; m < M; ++m) {
      const T* kr = keys.raw() + (b * M + m) * K;
      const T* vr = values.raw() + (b * M + m) * V;
      for (std::size_t k = 0; k < K; ++k) {
        const T kv = kr[k];
        T* orow = o + k * V;
        for (std::size_t v = 0; v < V; ++v) orow[v] += kv * vr[v];
      }
    }
  }
  return out;
}

template <class T>
BasicTensor<T> k_position(const BasicTensor<T>& emb, const BasicTensor<T>& values) {  // nmk,bmv->bnkv
  const std::size_t N = emb.extent(0), M = emb.extent(1), K = emb.extent(2);
  const std::size_t B = values.extent(0), V = values.extent(2);
  BasicTensor<T> out({B, N, K, V});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t n = 0; n < N; ++n) {
      T* o = out.raw() + (b * N + n) * K * V;
      for (std::size_t m = 0; m < M; ++m) {
        const T* er = emb.raw() + (n * M + m) * K;
        const T* vr = values.raw() + (b * M + m) * V;
        for (std::size_t k = 0; k < K; ++k) {
          const T e = er[k];
          T* orow = o + k * V;
          for (std::size_t v = 0; v < V; ++v) orow[v] += e * vr[v];
        }
      }
    }
  }
  return out;
}

template <class T, bool kPerPosition>
BasicTensor<T> k_apply(const BasicTensor<T>& q, const BasicTensor<T>& lam) {
  // bhnk,bkv->bnhv  or  bhnk,bnkv->bnhv
  const std::size_t B = q.extent(0), H = q.extent(1), N = q.extent(2), K = q.extent(3);
  const std::size_t V = lam.extent(lam.rank() - 1);
  BasicTensor<T> out({B, N, H, V});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t n = 0; n < N; ++n) {
        const T* qr = q.raw() + ((b * H + h) * N + n) * K;
        const T* l = kPerPosition ? lam.raw() + (b * N + n) * K * V : lam.raw() + b * K * V;
        T* o = out.raw() + ((b * N + n) * H + h) * V;
        for (std::size_t k = 0; k < K; ++k) {
          const T qv = qr[k];
          const T* lr = l + k * V;
          for (std::size_t v = 0; v < V; ++v) o[v] += qv * lr[v];
        }
      }
    }
  }
  return out;
}

template <class T>
BasicTensor<T> k_position_grad_emb(const BasicTensor<T>& g, const BasicTensor<T>& values) {
  // bnkv,bmv->nmk
  const std::size_t B = g.extent(0), N = g.extent(1), K = g.extent(2), V = g.extent(3);
  const std::size_t M = values.extent(1);
  BasicTensor<T> out({N, M, K});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = 0; m < M; ++m) {
        const T* vr = values.raw() + (b * M + m) * V;
        T* o = out.raw() + (n * M + m) * K;
        for (std::size_t k = 0; k < K; ++k) {
          const T* gr = g.raw() + ((b * N + n) * K + k) * V;
          T acc = o[k];
          for (std::size_t v = 0; v < V; ++v) acc += gr[v] * vr[v];
          o[k] = acc;
        }
      }
    }
  }
  return out;
}

template <class T>
BasicTensor<T> k_position_grad_values(const BasicTensor<T>& emb, const BasicTensor<T>& g) {
  // nmk,bnkv->bmv
  const std::size_t N = emb.extent(0), M = emb.extent(1), K = emb.extent(2);
  const std::size_t B = g.extent(0), V = g.extent(3);
  BasicTensor<T> out({B, M, V});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = 0; m < M; ++m) {
        const T* er = emb.raw() + (n * M + m) * K;
        T* o = out.raw() + (b * M + m) * V;
        for (std::size_t k = 0; k < K; ++k) {
          const T e = er[k];
          const T* gr = g.raw() + ((b * N + n) * K + k) * V;
          for (std::size_t v = 0; v < V; ++v) o[v] += e * gr[v];
        }
      }
    }
  }
  return out;
}

template <class T>
using Kernel = BasicTensor<T> (*)(const BasicTensor<T>&, const BasicTensor<T>&);

template <class T>
Kernel<T> find_kernel(const std::string& spec) {
  static const std::map<std::string, Kernel<T>> table = {
      {"bnd,de->bne", &k_project<T>},
      {"bmk,bmv->bkv", &k_content<T>},
      {"nmk,bmv->bnkv", &k_position<T>},
      {"bhnk,bkv->bnhv", &k_apply<T, false>},
      {"bhnk,bnkv->bnhv", &k_apply<T, true>},
      {"bnkv,bmv->nmk", &k_position_grad_emb<T>},
      {"nmk,bnkv->bmv", &k_position_grad_values<T>},
  };
  auto it = table.find(spec);
  return it == table.end() ? nullptr : it->second;
}

}  // namespace

std::uint64_t contraction_multiplies(const ContractionSpec& spec, std::span<const Shape> shapes) {
  if (shapes.size() < 2) return 0;
  ExtentMap extents;
  for (std::size_t i = 0; i < shapes.size() && i < spec.inputs.size(); ++i) {
    for (std::size_t a = 0; a < spec.inputs[i].size() && a < shapes[i].size(); ++a) {
      extents.emplace(spec.inputs[i][a], shapes[i][a]);
    }
  }
  std::uint64_t volume = 1;
  for (const auto& [label, e] : extents) volume *= e;
  return volume * (shapes.size() - 1);
}

bool has_specialized_kernel(std::string_view spec) {
  return find_kernel<double>(ContractionSpec::parse(spec).str()) != nullptr;
}

std::vector<std::string> specialized_specs() {
  return {"bnd,de->bne",     "bmk,bmv->bkv",   "nmk,bmv->bnkv", "bhnk,bkv->bnhv",
          "bhnk,bnkv->bnhv", "bnkv,bmv->nmk", "nmk,bnkv->bmv"};
}

template <class T>
BasicTensor<T> contract(std::string_view text, std::span<const BasicTensor<T>* const> operands,
                        ContractPath path) {
  const auto spec = ContractionSpec::parse(text);
  const auto extents = resolve_extents<T>(spec, operands);

  if (operands.size() >= 2) {
    std::uint64_t volume = 1;
    for (const auto& [label, e] : extents) volume *= e;
    cost::record(volume * (operands.size() - 1));
  }

  if (path == ContractPath::kAuto && operands.size() == 2) {
    if (auto kernel = find_kernel<T>(spec.str())) return kernel(*operands[0], *operands[1]);
  }
  return generic_contract<T>(spec, operands, extents);
}

template BasicTensor<double> contract<double>(std::string_view,
                                              std::span<const BasicTensor<double>* const>,
                                              ContractPath);
template BasicTensor<float> contract<float>(std::string_view,
                                            std::span<const BasicTensor<float>* const>,
                                            ContractPath);

}  // namespace lambdanet
