// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace lambdanet::cost {

// Instrumented multiply counting. Every contraction records the number of
// scalar multiplies it performs under the currently active term label.
// Counting is per thread and only happens while a Counter is alive.

/// Labels used by the layer kernels.
namespace term {
inline constexpr const char* kProjection = "projection";
inline constexpr const char* kContent = "content";
inline constexpr const char* kPosition = "position";
inline constexpr const char* kMask = "mask";
inline constexpr const char* kApply = "apply";
inline constexpr const char* kLogits = "logits";
inline constexpr const char* kRelative = "relative";
inline constexpr const char* kAggregate = "aggregate";
inline constexpr const char* kUntracked = "untracked";
}  // namespace term

class Counter {
 public:
  Counter();
  ~Counter();
  Counter(const Counter&) = delete;
  Counter& operator=(const Counter&) = delete;

  std::uint64_t total() const;
  /// Total excluding projection and untracked terms: the lambda generation and
  /// application work that the closed-form time model describes.
  std::uint64_t layer_total() const;
  std::uint64_t get(const std::string& label) const;
  const std::map<std::string, std::uint64_t>& terms() const { return terms_; }

  void add(const char* label, std::uint64_t count);

 private:
  std::map<std::string, std::uint64_t> terms_;
  Counter* previous_;
};

/// Sets the term label for contractions issued while alive.
class Term {
 public:
  explicit Term(const char* label) noexcept;
  ~Term();
  Term(const Term&) = delete;
  Term& operator=(const Term&) = delete;

 private:
  const char* previous_;
};

/// Records `count` multiplies under the active term, if a Counter is alive.
void record(std::uint64_t count) noexcept;

}  // namespace lambdanet::cost
