// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <new>

namespace lambdanet::memory {

// Per-thread accounting of tensor buffer allocations. Every tensor buffer goes
// through TrackingAllocator, so a Scope sees all tensor traffic on its thread.
struct Counters {
  std::int64_t live_bytes = 0;
  std::int64_t peak_bytes = 0;
  std::int64_t largest_allocation = 0;
};

Counters& thread_counters() noexcept;

void on_allocate(std::size_t bytes) noexcept;
void on_deallocate(std::size_t bytes) noexcept;

/// Measures peak transient bytes and the largest single allocation made while
/// the scope is alive, relative to the live bytes at construction.
class Scope {
 public:
  Scope() noexcept;
  ~Scope();
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

  std::int64_t peak_transient_bytes() const noexcept;
  std::int64_t largest_allocation() const noexcept;

 private:
  std::int64_t baseline_;
  Counters saved_;
};

template <class T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <class U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    auto* p = static_cast<T*>(::operator new(n * sizeof(T)));
    on_allocate(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    on_deallocate(n * sizeof(T));
    ::operator delete(p);
  }

  template <class U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

}  // namespace lambdanet::memory
