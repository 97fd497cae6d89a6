// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/complexity.hpp"

#include <charconv>
#include <set>

#include "lambdanet/error.hpp"

namespace lambdanet {
namespace {

struct OpName {
  OpKind op;
  const char* name;
};

constexpr OpName kOpNames[] = {
    {OpKind::kLambda, "lambda"},
    {OpKind::kLambdaConv, "lambda-conv"},
    {OpKind::kMultiheadLambda, "multihead-lambda"},
    {OpKind::kIntraDepthLambda, "intra-depth-lambda"},
    {OpKind::kMaskedLambda, "masked-lambda"},
    {OpKind::kContentOnlyLambda, "content-only-lambda"},
    {OpKind::kLambdaSharedEmbeddings, "lambda-shared"},
    {OpKind::kAttention, "attention"},
    {OpKind::kRelativeAttention, "relative-attention"},
    {OpKind::kLinearAttention, "linear-attention"},
    {OpKind::kAxialAttention, "axial-attention"},
    {OpKind::kLocalAttention, "local-attention"},
};

std::uint64_t need(const std::optional<std::uint64_t>& dim, const char* name, OpKind op) {
  if (!dim) throw ConfigError("dimension " + std::string(name) + " is required for " + to_string(op));
  if (*dim == 0) throw ConfigError("dimension " + std::string(name) + " must be positive");
  return *dim;
}

std::uint64_t parse_count(std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value == 0) {
    throw ConfigError("invalid stage entry '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

OpKind parse_op_kind(std::string_view text) {
  for (const auto& e : kOpNames) {
    if (text == e.name) return e.op;
  }
  throw ConfigError("unknown op kind '" + std::string(text) + "'");
}

std::string to_string(OpKind op) {
  for (const auto& e : kOpNames) {
    if (e.op == op) return e.name;
  }
  return "?";
}

std::vector<OpKind> all_op_kinds() {
  std::vector<OpKind> ops;
  for (const auto& e : kOpNames) ops.push_back(e.op);
  return ops;
}

ComplexityReport time_cost(OpKind op, const DimSet& dims) {
  ComplexityReport rep;
  rep.op = op;
  auto& t = rep.terms;
  auto get = [&](const std::optional<std::uint64_t>& d, const char* name) { return need(d, name, op); };
  switch (op) {
    case OpKind::kLambda:
    case OpKind::kLambdaSharedEmbeddings: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["content"] = b * m * k * v;
      t["position"] = b * n * m * k * v;
      t["apply"] = 2 * b * h * n * k * v;
      break;
    }
    case OpKind::kLambdaConv: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), r = get(dims.r, "r"),
                 k = get(dims.k, "k"), v = get(dims.v, "v"), h = get(dims.h, "h");
      const auto u = dims.u.value_or(1);
      t["content"] = b * m * k * v * u;
      t["position"] = b * n * r * k * v * u;
      t["apply"] = 2 * b * h * n * k * v;
      break;
    }
    case OpKind::kMultiheadLambda: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["content"] = h * b * m * k * v;
      t["position"] = h * b * n * m * k * v;
      t["apply"] = 2 * b * h * n * k * v;
      break;
    }
    case OpKind::kIntraDepthLambda: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h"), u = get(dims.u, "u");
      t["content"] = b * m * k * v * u;
      t["position"] = b * n * m * k * v * u;
      t["apply"] = 2 * b * h * n * k * v;
      break;
    }
    case OpKind::kMaskedLambda: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["content"] = b * n * m * k * v;
      t["mask"] = n * m * k;
      t["position"] = b * n * m * k * v;
      t["apply"] = 2 * b * h * n * k * v;
      break;
    }
    case OpKind::kContentOnlyLambda: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["content"] = b * m * k * v;
      t["apply"] = b * h * n * k * v;
      break;
    }
    case OpKind::kAttention:
    case OpKind::kRelativeAttention: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["logits"] = b * h * n * m * k;
      if (op == OpKind::kRelativeAttention) t["relative"] = b * h * n * m * k;
      t["aggregate"] = b * h * n * m * v;
      break;
    }
    case OpKind::kLinearAttention: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["content"] = b * h * m * k * v;
      t["apply"] = b * h * n * k * v;
      break;
    }
    case OpKind::kAxialAttention: {
      const auto b = get(dims.b, "b"), hh = get(dims.height, "height"), ww = get(dims.width, "width"),
                 k = get(dims.k, "k"), v = get(dims.v, "v"), h = get(dims.h, "h");
      const auto n = hh * ww;
      t["logits"] = b * h * n * (hh + ww) * k;
      t["aggregate"] = b * h * n * (hh + ww) * v;
      break;
    }
    case OpKind::kLocalAttention: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), r = get(dims.r, "r"), k = get(dims.k, "k"),
                 v = get(dims.v, "v"), h = get(dims.h, "h");
      t["logits"] = b * h * n * r * k;
      t["aggregate"] = b * h * n * r * v;
      break;
    }
  }
  for (const auto& [label, count] : t) rep.multiplies += count;
  return rep;
}

ComplexityReport space_cost(OpKind op, const DimSet& dims) {
  ComplexityReport rep;
  rep.op = op;
  auto& t = rep.terms;
  auto get = [&](const std::optional<std::uint64_t>& d, const char* name) { return need(d, name, op); };
  const std::uint64_t l = dims.l.value_or(1);
  if (l == 0) throw ConfigError("layer count must be positive");
  const std::uint64_t bpe = dims.bytes_per_element;
  const bool acts = dims.include_activations;
  switch (op) {
    case OpKind::kLambda:
    case OpKind::kMaskedLambda:
    case OpKind::kIntraDepthLambda:
    case OpKind::kMultiheadLambda: {
      const auto n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k");
      const auto u = op == OpKind::kIntraDepthLambda ? get(dims.u, "u") : 1;
      const auto heads = op == OpKind::kMultiheadLambda ? get(dims.h, "h") : 1;
      t["embeddings"] = heads * k * u * n * m * l * bpe;
      if (acts) {
        const auto b = get(dims.b, "b"), v = get(dims.v, "v");
        t["activations"] = heads * b * n * k * v * l * bpe;
      }
      break;
    }
    case OpKind::kLambdaSharedEmbeddings: {
      const auto n = get(dims.n, "n"), m = get(dims.m, "m"), k = get(dims.k, "k");
      t["embeddings"] = k * n * m * bpe;
      if (acts) {
        const auto b = get(dims.b, "b"), v = get(dims.v, "v");
        t["activations"] = b * n * k * v * l * bpe;
      }
      break;
    }
    case OpKind::kLambdaConv: {
      const auto r = get(dims.r, "r"), k = get(dims.k, "k");
      const auto u = dims.u.value_or(1);
      t["embeddings"] = k * r * u * l * bpe;
      if (acts) {
        const auto b = get(dims.b, "b"), n = get(dims.n, "n"), v = get(dims.v, "v");
        t["activations"] = b * n * k * v * l * bpe;
      }
      break;
    }
    case OpKind::kContentOnlyLambda: {
      t["embeddings"] = 0;
      if (acts) {
        const auto b = get(dims.b, "b"), k = get(dims.k, "k"), v = get(dims.v, "v");
        t["activations"] = b * k * v * l * bpe;
      }
      break;
    }
    case OpKind::kAttention:
    case OpKind::kRelativeAttention: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), m = get(dims.m, "m"), h = get(dims.h, "h");
      t["attention_maps"] = b * h * n * m * l * bpe;
      if (op == OpKind::kRelativeAttention) t["embeddings"] = get(dims.k, "k") * n * m * l * bpe;
      break;
    }
    case OpKind::kLinearAttention: {
      const auto b = get(dims.b, "b"), k = get(dims.k, "k"), v = get(dims.v, "v"), h = get(dims.h, "h");
      t["activations"] = b * h * k * v * l * bpe;
      break;
    }
    case OpKind::kAxialAttention: {
      const auto b = get(dims.b, "b"), hh = get(dims.height, "height"), ww = get(dims.width, "width"),
                 h = get(dims.h, "h");
      t["attention_maps"] = b * h * hh * ww * (hh + ww) * l * bpe;
      break;
    }
    case OpKind::kLocalAttention: {
      const auto b = get(dims.b, "b"), n = get(dims.n, "n"), r = get(dims.r, "r"), h = get(dims.h, "h");
      t["attention_maps"] = b * h * n * r * l * bpe;
      break;
    }
  }
  for (const auto& [label, bytes] : t) rep.bytes += bytes;
  return rep;
}

StageSpec StageSpec::parse(std::string_view text) {
  StageSpec spec;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? comma : comma - start);
    const auto x = item.find('x');
    if (x == std::string_view::npos) {
      throw ConfigError("stage '" + std::string(item) + "' must be LAYERSxSIDE");
    }
    spec.stages.push_back({parse_count(item.substr(0, x)), parse_count(item.substr(x + 1))});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (spec.stages.empty()) throw ConfigError("stage spec is empty");
  return spec;
}

std::string StageSpec::str() const {
  std::string s;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(stages[i].layers) + "x" + std::to_string(stages[i].side);
  }
  return s;
}

StageSpec default_stages() { return StageSpec{{{3, 56}, {4, 28}, {6, 14}, {3, 7}}}; }

const MemoryRow& MemoryReport::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ConfigError("memory report has no row '" + std::string(name) + "'");
}

MemoryReport memory_report(const StageSpec& stages, const MemoryOptions& options) {
  if (stages.stages.empty()) throw ConfigError("stage spec is empty");
  for (const auto& s : stages.stages) {
    if (s.layers == 0 || s.side == 0) throw ConfigError("stage layer counts and sides must be positive");
  }
  MemoryReport report;
  report.stages = stages;
  report.options = options;

  const std::uint64_t window = options.scope * options.scope;
  const std::string scope = std::to_string(options.scope) + "x" + std::to_string(options.scope);
  auto add_row = [&](std::string name, OpKind op, std::uint64_t k, auto&& dims_for_stage) {
    MemoryRow row;
    row.name = std::move(name);
    row.op = op;
    row.k = k;
    std::set<std::uint64_t> seen_sides;
    for (const auto& s : stages.stages) {
      DimSet dims = dims_for_stage(s);
      dims.bytes_per_element = options.bytes_per_element;
      std::uint64_t bytes = 0;
      // Shared embeddings are stored once per distinct resolution.
      if (op != OpKind::kLambdaSharedEmbeddings || seen_sides.insert(s.side).second) {
        bytes = space_cost(op, dims).bytes;
      }
      row.stage_bytes.push_back(bytes);
      row.bytes += bytes;
    }
    report.rows.push_back(std::move(row));
  };
  auto base = [&](const Stage& s, std::uint64_t k) {
    DimSet d;
    d.b = options.b;
    d.h = options.h;
    d.k = k;
    d.n = s.side * s.side;
    d.m = s.side * s.side;
    d.height = s.side;
    d.width = s.side;
    d.r = window;
    d.l = s.layers;
    return d;
  };
  const std::uint64_t k = options.k;
  add_row("global attention", OpKind::kAttention, k, [&](const Stage& s) { return base(s, k); });
  add_row("axial attention", OpKind::kAxialAttention, k, [&](const Stage& s) { return base(s, k); });
  add_row("local attention (" + scope + ")", OpKind::kLocalAttention, k,
          [&](const Stage& s) { return base(s, k); });
  add_row("lambda layer (k=" + std::to_string(k) + ")", OpKind::kLambda, k,
          [&](const Stage& s) { return base(s, k); });
  if (k >= 2) {
    add_row("lambda layer (k=" + std::to_string(k / 2) + ")", OpKind::kLambda, k / 2,
            [&](const Stage& s) { return base(s, k / 2); });
  }
  add_row("lambda layer (shared embeddings)", OpKind::kLambdaSharedEmbeddings, k,
          [&](const Stage& s) { return base(s, k); });
  add_row("lambda convolution (" + scope + ")", OpKind::kLambdaConv, k,
          [&](const Stage& s) { return base(s, k); });
  return report;
}

}  // namespace lambdanet
