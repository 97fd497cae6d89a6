// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lambdanet/lambda_layer.hpp"

namespace lambdanet {

// Marker-quadrant task: a height x width grid holds a single marker and the
// label is the quadrant containing it. Inputs have two channels per position,
// the marker indicator and a constant one. The model is one lambda layer with
// the input as its own context, a mean over positions, and a linear
// classifier.

struct ToyTaskSpec {
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t steps = 2000;
  std::size_t batch = 16;
  double learning_rate = 0.05;
  std::size_t eval_every = 100;
  std::size_t k = 4;
  std::size_t h = 2;
  std::size_t v = 4;

  std::size_t positions() const noexcept { return height * width; }
};

inline constexpr std::size_t kToyClasses = 4;

struct ToyModel {
  LambdaConfig config;
  LambdaParams layer;
  Tensor w_cls;  // [h*v, 4]
  Tensor b_cls;  // [4]
};

ToyModel init_toy_model(const ToyTaskSpec& spec, Interactions mode, std::uint64_t seed);

/// Quadrant of a flat marker position: 2 * (row in bottom half) + (col in right half).
std::size_t toy_label(const ToyTaskSpec& spec, std::size_t position);

/// Inputs [markers.size(), positions, 2].
Tensor toy_inputs(const ToyTaskSpec& spec, std::span<const std::size_t> markers);

/// Mean-pooled layer output [b, h*v].
Tensor toy_pooled(const ToyModel& model, const Tensor& inputs);

/// Classifier logits [b, 4].
Tensor toy_logits(const ToyModel& model, const Tensor& inputs);

struct ToyEval {
  std::size_t step = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct ToyReport {
  Interactions mode = Interactions::kBoth;
  std::uint64_t seed = 0;
  std::vector<ToyEval> curve;
  double final_test_accuracy = 0.0;
  bool diverged = false;
};

/// Plain SGD on cross-entropy with fresh random markers each step. The test
/// set is every marker position once.
ToyReport train_toy(const ToyTaskSpec& spec, Interactions mode, std::uint64_t seed);

}  // namespace lambdanet
