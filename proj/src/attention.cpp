// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/attention.hpp"

#include "lambdanet/contract.hpp"
#include "lambdanet/cost.hpp"
#include "lambdanet/ops.hpp"

namespace lambdanet {
namespace {

void check_qkv(const Tensor& q, const Tensor& keys, const Tensor& values) {
  if (q.rank() != 4 || keys.rank() != 4 || values.rank() != 4) {
    throw ShapeError("attention expects [b, h, n, k], [b, h, m, k], [b, h, m, v]");
  }
}

}  // namespace

Tensor attention_forward(const Tensor& queries, const Tensor& keys, const Tensor& values,
                         const Tensor* relative_embeddings) {
  check_qkv(queries, keys, values);
  Tensor logits;
  {
    cost::Term term(cost::term::kLogits);
    logits = contract<double>("bhnk,bhmk->bhnm", queries, keys);
  }
  if (relative_embeddings != nullptr) {
    cost::Term term(cost::term::kRelative);
    logits = add(logits, contract<double>("bhnk,nmk->bhnm", queries, *relative_embeddings));
  }
  const auto weights = softmax(logits, 3);
  cost::Term term(cost::term::kAggregate);
  return contract<double>("bhnm,bhmv->bhnv", weights, values);
}

Tensor linear_attention_forward(const Tensor& queries, const Tensor& keys, const Tensor& values) {
  check_qkv(queries, keys, values);
  Tensor summary;
  {
    cost::Term term(cost::term::kContent);
    summary = contract<double>("bhmk,bhmv->bhkv", softmax(keys, 2), values);
  }
  cost::Term term(cost::term::kApply);
  return contract<double>("bhnk,bhkv->bhnv", queries, summary);
}

Tensor axial_attention_forward(const Tensor& queries, const Tensor& keys, const Tensor& values,
                               std::size_t height, std::size_t width) {
  check_qkv(queries, keys, values);
  const std::size_t b = queries.extent(0), h = queries.extent(1), k = queries.extent(3);
  const std::size_t v = values.extent(3);
  if (queries.extent(2) != height * width || keys.extent(2) != height * width) {
    throw ShapeError("axial attention needs n = m = height * width");
  }
  const auto q = queries.reshape({b, h, height, width, k});
  const auto kk = keys.reshape({b, h, height, width, k});
  const auto vv = values.reshape({b, h, height, width, v});

  Tensor row_logits, col_logits;
  {
    cost::Term term(cost::term::kLogits);
    row_logits = contract<double>("bhiwk,bhixk->bhiwx", q, kk);
    col_logits = contract<double>("bhiwk,bhjwk->bhiwj", q, kk);
  }
  cost::Term term(cost::term::kAggregate);
  const auto rows = contract<double>("bhiwx,bhixv->bhiwv", softmax(row_logits, 4), vv);
  const auto cols = contract<double>("bhiwj,bhjwv->bhiwv", softmax(col_logits, 4), vv);
  return add(rows, cols).reshape({b, h, height * width, v});
}

}  // namespace lambdanet
