// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/cost.hpp"


namespace lambdanet::cost {
namespace {

thread_local Counter* active_counter = nullptr;
thread_local const char* active_term = term::kUntracked;

}  // namespace

Counter::Counter() : previous_(active_counter) { active_counter = this; }

Counter::~Counter() {
  active_counter = previous_;
  // Nested counters see the same work as their parent.
  if (previous_ != nullptr) {
    for (const auto& [label, count] : terms_) previous_->terms_[label] += count;
  }
}

std::uint64_t Counter::total() const {
  std::uint64_t sum = 0;
  for (const auto& [label, count] : terms_) sum += count;
  return sum;
}

std::uint64_t Counter::layer_total() const {
  std::uint64_t sum = 0;
  for (const auto& [label, count] : terms_) {
    if (label != term::kProjection && label != term::kUntracked) sum += count;
  }
  return sum;
}

std::uint64_t Counter::get(const std::string& label) const {
  auto it = terms_.find(label);
  return it == terms_.end() ? 0 : it->second;
}

void Counter::add(const char* label, std::uint64_t count) { terms_[label] += count; }

Term::Term(const char* label) noexcept : previous_(active_term) { active_term = label; }

Term::~Term() { active_term = previous_; }

void record(std::uint64_t count) noexcept {
  if (active_counter == nullptr) return;
  try {
    active_counter->add(active_term, count);
  } catch (...) {
    // Allocation failure in the ledger map; counting is best effort.
  }
}

}  // namespace lambdanet::cost
