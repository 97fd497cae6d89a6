// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "lambdanet/bench.hpp"
#include "lambdanet/suites.hpp"
#include "lambdanet/toy_task.hpp"

namespace {

using namespace lambdanet;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool passed = true;
  std::string detail;
};

// Runs a suite and folds its properties into one outcome. `min_cases` applies
// to the properties whose names start with `prefix`.
Outcome suite_outcome(const std::string& name, double time_limit, std::size_t min_cases = 0,
                      const std::string& prefix = "") {
  const auto t0 = Clock::now();
  const auto report = run_suite(name);
  const double elapsed = seconds_since(t0);
  Outcome o;
  std::ostringstream os;
  std::size_t cases = 0;
  double worst = 0.0;
  for (const auto& p : report.properties) {
    cases += p.cases;
    if (p.tolerance > 0.0) worst = std::max(worst, p.worst_error);
    if (!p.passed) {
      o.passed = false;
      os << " failed " << report.suite << "/" << p.name << " [" << p.detail << "];";
    }
    if (min_cases > 0 && p.name.rfind(prefix, 0) == 0 && p.cases < min_cases) {
      o.passed = false;
      os << " " << p.name << " ran " << p.cases << " cases, need " << min_cases << ";";
    }
  }
  if (time_limit > 0.0 && elapsed >= time_limit) {
    o.passed = false;
    os << " took " << elapsed << " s, limit " << time_limit << " s;";
  }
  std::ostringstream head;
  head << report.properties.size() << " properties, " << cases << " cases, worst toleranced error " << worst
       << ", " << elapsed << " s;";
  o.detail = head.str() + os.str();
  return o;
}

Outcome scaling_outcome() {
  BenchOptions options;
  auto sweep = [&](PositionImpl impl, std::size_t scope, const std::vector<std::size_t>& lengths,
                   std::ostringstream& os) {
    const auto points = bench_sweep(Variant::kGlobal, scaling_config(impl, scope), 1, lengths, kDefaultSeed, options);
    std::vector<double> x, y;
    for (const auto& p : points) {
      x.push_back(static_cast<double>(p.n));
      y.push_back(p.median);
    }
    os << to_string(impl) << " n=" << lengths.front() << ".." << lengths.back();
    return std::pair{fit_linear(x, y), fit_loglog(x, y)};
  };
  std::ostringstream os;
  const auto [conv_lin, conv_log] = sweep(PositionImpl::kConv, 15, conv_sweep_lengths(), os);
  os << " linear R2 " << conv_lin.r2 << " (log-log slope " << conv_log.slope << "); ";
  const auto [glob_lin, glob_log] = sweep(PositionImpl::kEinsum, 0, global_sweep_lengths(), os);
  os << " log-log slope " << glob_log.slope << " (R2 " << glob_log.r2 << ")";
  const bool ok = conv_lin.r2 > 0.98 && glob_log.slope >= 1.7 && glob_log.slope <= 2.3;
  return {ok, os.str()};
}

Outcome toy_outcome() {
  const auto t0 = Clock::now();
  const ToyTaskSpec spec;
  constexpr double kHighAccuracy = 0.95;
  constexpr double kChanceCeiling = 0.35;
  struct Run {
    Interactions mode;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  for (const auto mode : {Interactions::kBoth, Interactions::kPositionOnly, Interactions::kContentOnly}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) runs.push_back({mode, seed});
  }
  // Each run draws from its own seeded streams, so they can train in parallel.
  std::vector<std::future<ToyReport>> futures;
  for (const auto& r : runs) {
    futures.push_back(std::async(std::launch::async, [&spec, r] { return train_toy(spec, r.mode, r.seed); }));
  }
  Outcome o;
  std::ostringstream os;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto report = futures[i].get();
    const double acc = report.final_test_accuracy;
    const bool content_only = runs[i].mode == Interactions::kContentOnly;
    const bool ok = !report.diverged && (content_only ? acc <= kChanceCeiling : acc >= kHighAccuracy);
    o.passed = o.passed && ok;
    os << to_string(runs[i].mode) << "/" << runs[i].seed << " " << acc << (ok ? "" : " (FAIL)") << "; ";
  }
  const auto invariance = suite_outcome("toy", 0.0);
  o.passed = o.passed && invariance.passed;
  const double elapsed = seconds_since(t0);
  if (elapsed >= 300.0) o.passed = false;
  os << "logit invariance " << (invariance.passed ? "holds" : "FAILS") << "; " << spec.steps << " steps; "
     << elapsed << " s";
  o.detail = os.str();
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"oracle-equivalence", [] { return suite_outcome("oracle", 10.0, 100, "global-vs-loop-oracle"); }},
      {"tri-implementation-equivalence", [] { return suite_outcome("equivalence", 0.0); }},
      {"masked-causal-correctness", [] { return suite_outcome("masked", 0.0); }},
      {"gradient-checks", [] { return suite_outcome("gradients", 60.0, 20, "fd-"); }},
      {"translation-equivariance", [] { return suite_outcome("equivariance", 0.0); }},
      {"memory-table", [] { return suite_outcome("memory", 0.0); }},
      {"complexity-counters", [] { return suite_outcome("complexity", 0.0); }},
      {"scaling-shape", scaling_outcome},
      {"special-case-collapses", [] { return suite_outcome("collapses", 0.0); }},
      {"toy-task", toy_outcome},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto o = criteria[i].check();
    if (!o.passed) ++failures;
    std::printf("%s %zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
