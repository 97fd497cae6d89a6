// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/memory.hpp"

#include <algorithm>

namespace lambdanet::memory {

Counters& thread_counters() noexcept {
  thread_local Counters counters;
  return counters;
}

void on_allocate(std::size_t bytes) noexcept {
  auto& c = thread_counters();
  const auto b = static_cast<std::int64_t>(bytes);
  c.live_bytes += b;
  c.peak_bytes = std::max(c.peak_bytes, c.live_bytes);
  c.largest_allocation = std::max(c.largest_allocation, b);
}

void on_deallocate(std::size_t bytes) noexcept {
  thread_counters().live_bytes -= static_cast<std::int64_t>(bytes);
}

Scope::Scope() noexcept : baseline_(thread_counters().live_bytes), saved_(thread_counters()) {
  auto& c = thread_counters();
  c.peak_bytes = c.live_bytes;
  c.largest_allocation = 0;
}

Scope::~Scope() {
  auto& c = thread_counters();
  c.peak_bytes = std::max(c.peak_bytes, saved_.peak_bytes);
  c.largest_allocation = std::max(c.largest_allocation, saved_.largest_allocation);
}

std::int64_t Scope::peak_transient_bytes() const noexcept {
  return thread_counters().peak_bytes - baseline_;
}

std::int64_t Scope::largest_allocation() const noexcept {
  return thread_counters().largest_allocation;
}

}  // namespace lambdanet::memory
