// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/toy_task.hpp"

#include <cmath>

#include "lambdanet/contract.hpp"
#include "lambdanet/grad.hpp"
#include "lambdanet/ops.hpp"
#include "lambdanet/rng.hpp"

namespace lambdanet {
namespace {

void sgd(Tensor& param, const Tensor& grad, double lr) {
  for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

}  // namespace

ToyModel init_toy_model(const ToyTaskSpec& spec, Interactions mode, std::uint64_t seed) {
  ToyModel model;
  auto& c = model.config;
  c.d_in = 2;
  c.k = spec.k;
  c.h = spec.h;
  c.d_out = spec.h * spec.v;
  c.position.geometry = Geometry::grid(spec.height, spec.width);
  c.position.boundary = Boundary::kClamped;
  c.interactions = mode;
  model.layer = init_params(c, seed);
  model.w_cls = Tensor({c.d_out, kToyClasses});
  model.b_cls = Tensor({kToyClasses});
  return model;
}

std::size_t toy_label(const ToyTaskSpec& spec, std::size_t position) {
  const std::size_t row = position / spec.width, col = position % spec.width;
  return 2 * (row >= spec.height / 2 ? 1 : 0) + (col >= spec.width / 2 ? 1 : 0);
}

Tensor toy_inputs(const ToyTaskSpec& spec, std::span<const std::size_t> markers) {
  const std::size_t n = spec.positions();
  Tensor x({markers.size(), n, 2});
  for (std::size_t b = 0; b < markers.size(); ++b) {
    if (markers[b] >= n) throw ConfigError("marker position out of range");
    for (std::size_t p = 0; p < n; ++p) {
      x[(b * n + p) * 2 + 0] = p == markers[b] ? 1.0 : 0.0;
      x[(b * n + p) * 2 + 1] = 1.0;
    }
  }
  return x;
}

Tensor toy_pooled(const ToyModel& model, const Tensor& inputs) {
  const auto y = lambda_layer_forward(inputs, inputs, model.layer, model.config);
  const std::size_t b = y.extent(0), n = y.extent(1), c = y.extent(2);
  Tensor pooled({b, c});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t j = 0; j < c; ++j) pooled[i * c + j] += y[(i * n + p) * c + j];
    }
  }
  return scale(pooled, 1.0 / static_cast<double>(n));
}

Tensor toy_logits(const ToyModel& model, const Tensor& inputs) {
  return add(contract<double>("bc,co->bo", toy_pooled(model, inputs), model.w_cls), model.b_cls);
}

ToyReport train_toy(const ToyTaskSpec& spec, Interactions mode, std::uint64_t seed) {
  if (spec.height < 2 || spec.width < 2) throw ConfigError("toy grid must be at least 2x2");
  if (spec.batch == 0 || spec.steps == 0 || spec.eval_every == 0) {
    throw ConfigError("toy batch, steps and eval interval must be positive");
  }
  ToyReport report;
  report.mode = mode;
  report.seed = seed;
  ToyModel model = init_toy_model(spec, mode, seed);
  const std::size_t n = spec.positions(), c = model.config.d_out, B = spec.batch;

  std::vector<std::size_t> test_markers(n);
  for (std::size_t p = 0; p < n; ++p) test_markers[p] = p;
  const Tensor test_x = toy_inputs(spec, test_markers);
  auto test_accuracy = [&] {
    const auto logits = toy_logits(model, test_x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < kToyClasses; ++j) {
        if (logits[i * kToyClasses + j] > logits[i * kToyClasses + best]) best = j;
      }
      correct += best == toy_label(spec, i) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
  };

  CounterRng data(seed, Stream::kData);
  std::vector<std::size_t> markers(B);
  double window_loss = 0.0, window_correct = 0.0;
  std::size_t window_steps = 0;
  for (std::size_t step = 1; step <= spec.steps; ++step) {
    for (auto& m : markers) m = data.below(n);
    const Tensor x = toy_inputs(spec, markers);
    const auto pooled = toy_pooled(model, x);
    const auto logits = add(contract<double>("bc,co->bo", pooled, model.w_cls), model.b_cls);
    const auto probs = softmax(logits, 1);

    Tensor dlogits = probs;
    double loss = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      const std::size_t label = toy_label(spec, markers[i]);
      loss -= std::log(probs[i * kToyClasses + label]);
      std::size_t best = 0;
      for (std::size_t j = 1; j < kToyClasses; ++j) {
        if (logits[i * kToyClasses + j] > logits[i * kToyClasses + best]) best = j;
      }
      window_correct += best == label ? 1.0 : 0.0;
      dlogits[i * kToyClasses + label] -= 1.0;
    }
    loss /= static_cast<double>(B);
    if (!std::isfinite(loss)) {
      report.diverged = true;
      break;
    }
    window_loss += loss;
    ++window_steps;
    dlogits = scale(dlogits, 1.0 / static_cast<double>(B));

    const auto dw_cls = contract<double>("bc,bo->co", pooled, dlogits);
    const auto db_cls = sum_leading(dlogits, 1);
    const auto dpooled = contract<double>("bo,co->bc", dlogits, model.w_cls);
    Tensor dy({B, n, c});
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t j = 0; j < c; ++j) dy[(i * n + p) * c + j] = dpooled[i * c + j] / static_cast<double>(n);
      }
    }
    const auto g = backward(Variant::kGlobal, x, x, model.layer, model.config, dy);

    const double lr = spec.learning_rate;
    sgd(model.w_cls, dw_cls, lr);
    sgd(model.b_cls, db_cls, lr);
    sgd(model.layer.w_q, g.w_q, lr);
    sgd(model.layer.w_k, g.w_k, lr);
    sgd(model.layer.w_v, g.w_v, lr);
    sgd(model.layer.r, g.r, lr);

    if (step % spec.eval_every == 0 || step == spec.steps) {
      ToyEval e;
      e.step = step;
      e.train_loss = window_loss / static_cast<double>(window_steps);
      e.train_accuracy = window_correct / static_cast<double>(window_steps * B);
      e.test_accuracy = test_accuracy();
      report.curve.push_back(e);
      window_loss = window_correct = 0.0;
      window_steps = 0;
    }
  }
  report.final_test_accuracy = report.diverged ? 0.0 : test_accuracy();
  return report;
}

}  // namespace lambdanet
