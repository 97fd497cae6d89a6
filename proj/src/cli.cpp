// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include "lambdanet/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lambdanet/bench.hpp"
#include "lambdanet/complexity.hpp"
#include "lambdanet/error.hpp"
#include "lambdanet/grad.hpp"
#include "lambdanet/mutation.hpp"
#include "lambdanet/rng.hpp"
#include "lambdanet/suites.hpp"
#include "lambdanet/toy_task.hpp"

namespace lambdanet::cli {
namespace {

using json = nlohmann::ordered_json;

// Relative error bound for gradcheck, matching the gradients suite.
constexpr double kGradTolerance = 1e-6;

// Shortest text that reads back to the same double.
std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("seed must be an unsigned 64-bit integer, got '" + text + "'");
}

std::string seed_text(std::uint64_t seed) {
  std::ostringstream os;
  os << "0x" << std::hex << std::uppercase << seed;
  return os.str();
}

void require_reference(const std::string& precision, const std::string& command) {
  if (parse_precision(precision) != Precision::kReference) {
    throw ConfigError(command + " runs at reference precision only");
  }
}

// One report in either output format. JSON carries the full config; CSV
// carries it as a leading comment line.
struct Output {
  json config;
  json result;
  std::vector<std::string> nondeterministic;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  bool passed = true;
};

// Flags bound to one subcommand. Every field is recorded in the report so
// the run can be replayed from it.
struct Flags {
  std::string seed = seed_text(kDefaultSeed);
  std::string format = "json";
  std::string out;
  std::string precision = "reference";
  // Layer shape.
  std::string geom = "seq:4";
  std::string scope = "none";
  std::string boundary = "clamped";
  std::string variant = "global";
  std::string impl = "einsum";
  std::string norm = "softmax";
  std::size_t k = 3, h = 2, u = 2, b = 2, d_in = 3, d_out = 4;
  bool hook = false;
  // verify
  std::string suite = "all";
  std::string mutate = "none";
  // bench
  std::string sweep = "none";
  std::size_t warmup = 5, iterations = 30;
  // gradcheck
  std::size_t cases = 1;
  // memmodel
  std::string stages = default_stages().str();
  std::size_t window = 7, bytes = 4;
  // train-toy
  std::string mode = "full";
  std::size_t steps = 2000;
  double lr = 0.05;

  std::uint64_t seed_value() const { return parse_seed(seed); }
};

// Registers an option and remembers how to write it back into the config.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& value, const std::string& help) {
    fields_.push_back([name, &value](json& j) { j[name] = value; });
    return app_->add_option("--" + name, value, help)->capture_default_str();
  }
  CLI::Option* flag(const std::string& name, bool& value, const std::string& help) {
    fields_.push_back([name, &value](json& j) { j[name] = value; });
    return app_->add_flag("--" + name, value, help);
  }

  json record(const std::string& command) const {
    json j;
    j["command"] = command;
    for (const auto& f : fields_) f(j);
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(json&)>> fields_;
};

void add_common(Binder& bind, Flags& f) {
  bind.add("seed", f.seed, "Base seed; decimal or 0x-prefixed hex");
  bind.add("format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  bind.add("out", f.out, "Write the report to this file instead of stdout");
}

void add_precision(Binder& bind, Flags& f) {
  bind.add("precision", f.precision, "reference (f64) or fast (f32)")
      ->check(CLI::IsMember({"reference", "f64", "fast", "f32"}));
}

void add_layer(Binder& bind, Flags& f) {
  bind.add("geom", f.geom, "Query geometry, seq:N or grid:HxW");
  bind.add("scope", f.scope, "Local scope such as 5 or 3x3, or none");
  bind.add("boundary", f.boundary, "Relative position boundary")->check(CLI::IsMember({"clamped", "circular"}));
  bind.add("norm", f.norm, "Key normalization")->check(CLI::IsMember({"softmax", "l2", "none"}));
  bind.add("k", f.k, "Query/key depth");
  bind.add("h", f.h, "Heads (queries per lambda)");
  bind.add("u", f.u, "Intra-depth, used by the intra-depth variant only");
  bind.add("b", f.b, "Batch size");
  bind.add("d-in", f.d_in, "Input channels");
  bind.add("d-out", f.d_out, "Output channels, a multiple of h");
  bind.flag("hook", f.hook, "Per-channel scale and shift on queries and values");
}

LambdaConfig layer_config(const Flags& f, Variant variant, PositionImpl impl) {
  LambdaConfig c;
  c.d_in = f.d_in;
  c.d_out = f.d_out;
  c.k = f.k;
  c.h = f.h;
  c.u = variant == Variant::kIntraDepth ? f.u : 1;
  c.position.geometry = Geometry::parse(f.geom);
  c.position.boundary = parse_boundary(f.boundary);
  if (f.scope != "none") c.position.scope = parse_scope(f.scope);
  c.key_norm = parse_key_norm(f.norm);
  c.impl = impl;
  c.qv_hook = f.hook;
  if (variant == Variant::kContentOnly) c.interactions = Interactions::kContentOnly;
  c.validate();
  return c;
}

std::vector<Variant> all_variants() {
  return {Variant::kGlobal, Variant::kMasked, Variant::kMultihead, Variant::kIntraDepth, Variant::kContentOnly};
}

// ---------------------------------------------------------------------------

Output cmd_verify(const Flags& f, std::ostream& err) {
  require_reference(f.precision, "verify");
  SuiteOptions options;
  options.seed = f.seed_value();
  if (f.impl != "all") options.impl = parse_position_impl(f.impl);
  std::vector<std::string> names;
  if (f.suite == "all") {
    names = suite_names();
  } else {
    names.push_back(f.suite);
  }

  const mutation::Guard guard(mutation::parse(f.mutate));
  Output o;
  o.csv_header = {"suite", "property", "passed", "worst_error", "tolerance", "cases", "detail"};
  json suites = json::array();
  json failures = json::array();
  for (const auto& name : names) {
    const auto report = run_suite(name, options);
    json props = json::array();
    for (const auto& p : report.properties) {
      props.push_back({{"name", p.name},
                       {"passed", p.passed},
                       {"worst_error", p.worst_error},
                       {"tolerance", p.tolerance},
                       {"cases", p.cases},
                       {"detail", p.detail}});
      o.csv_rows.push_back({name, p.name, p.passed ? "true" : "false", num(p.worst_error), num(p.tolerance),
                            std::to_string(p.cases), csv_field(p.detail)});
      if (!p.passed) err << "FAIL " << name << "/" << p.name << ": " << p.detail << "\n";
    }
    for (const auto& name_failed : report.failures()) failures.push_back(name_failed);
    err << name << ": " << (report.passed() ? "pass" : "FAIL") << " (" << report.properties.size()
        << " properties)\n";
    suites.push_back({{"suite", name}, {"passed", report.passed()}, {"properties", props}});
  }
  o.passed = failures.empty();
  o.result = {{"suites", suites}, {"failures", failures}};
  return o;
}

json point_json(const BenchPoint& p) {
  json j = {{"variant", to_string(p.variant)},
            {"impl", to_string(p.config.impl)},
            {"geom", p.config.position.geometry.str()},
            {"scope", p.config.position.scope ? scope_str(*p.config.position.scope) : "none"},
            {"b", p.b},
            {"n", p.n},
            {"multiplies", p.multiplies},
            {"warmup", p.warmup},
            {"iterations", p.iterations},
            {"median", p.median},
            {"p10", p.p10},
            {"p90", p.p90},
            {"ns_per_multiply", p.multiplies ? p.median * 1e9 / static_cast<double>(p.multiplies) : 0.0}};
  return j;
}

std::vector<std::string> point_row(const BenchPoint& p) {
  return {to_string(p.variant), to_string(p.config.impl), p.config.position.geometry.str(), std::to_string(p.b),
          std::to_string(p.n), std::to_string(p.multiplies), std::to_string(p.iterations), num(p.median),
          num(p.p10), num(p.p90)};
}

Output cmd_bench(const Flags& f, std::ostream& err) {
  BenchOptions options;
  options.warmup = f.warmup;
  options.iterations = f.iterations;
  options.precision = parse_precision(f.precision);
  if (options.warmup < 5 || options.iterations < 30) {
    throw ConfigError("bench needs at least 5 warmup and 30 timed iterations");
  }
  const auto seed = f.seed_value();
  const auto variant = parse_variant(f.variant);

  Output o;
  o.nondeterministic = {"median", "p10", "p90", "ns_per_multiply", "fit"};
  o.csv_header = {"variant", "impl", "geom", "b", "n", "multiplies", "iterations", "median_s", "p10_s", "p90_s"};
  json points = json::array();
  auto keep = [&](const BenchPoint& p) {
    points.push_back(point_json(p));
    o.csv_rows.push_back(point_row(p));
    err << to_string(p.config.impl) << " n=" << p.n << " median " << p.median * 1e3 << " ms\n";
  };

  if (f.sweep == "none") {
    std::vector<PositionImpl> impls;
    if (f.impl == "all") {
      impls = {PositionImpl::kEinsum, PositionImpl::kConv, PositionImpl::kDepthwise};
    } else {
      impls.push_back(parse_position_impl(f.impl));
    }
    for (const auto impl : impls) keep(bench_forward(variant, layer_config(f, variant, impl), f.b, seed, options));
    o.result = {{"points", points}};
    return o;
  }

  // Sweeps use the fixed scaling layer; only the seed, precision and timing
  // flags apply.
  const bool conv = f.sweep == "conv";
  const auto base = conv ? scaling_config(PositionImpl::kConv, 15) : scaling_config(PositionImpl::kEinsum, 0);
  const auto lengths = conv ? conv_sweep_lengths() : global_sweep_lengths();
  const auto sweep = bench_sweep(Variant::kGlobal, base, 1, lengths, seed, options);
  std::vector<double> x, y;
  for (const auto& p : sweep) {
    keep(p);
    x.push_back(static_cast<double>(p.n));
    y.push_back(p.median);
  }
  const auto lin = fit_linear(x, y);
  const auto log = fit_loglog(x, y);
  o.result = {{"sweep", f.sweep},
              {"points", points},
              {"fit",
               {{"linear", {{"slope", lin.slope}, {"intercept", lin.intercept}, {"r2", lin.r2}}},
                {"loglog", {{"slope", log.slope}, {"intercept", log.intercept}, {"r2", log.r2}}}}}};
  err << "linear r2 " << lin.r2 << ", log-log slope " << log.slope << "\n";
  return o;
}

Output cmd_gradcheck(const Flags& f, std::ostream& err) {
  require_reference(f.precision, "gradcheck");
  if (f.cases == 0) throw ConfigError("gradcheck needs at least one case");
  std::vector<Variant> variants;
  if (f.variant == "all") {
    variants = all_variants();
  } else {
    variants.push_back(parse_variant(f.variant));
  }
  const auto impl = parse_position_impl(f.impl);
  const auto seed = f.seed_value();

  Output o;
  o.csv_header = {"variant", "case", "seed", "primal", "coordinates", "max_rel_error", "worst_index", "analytic",
                  "numeric"};
  json runs = json::array();
  double worst = 0.0;
  for (const auto variant : variants) {
    // Only the global variant has conv position paths.
    const auto cfg = layer_config(f, variant, variant == Variant::kGlobal ? impl : PositionImpl::kEinsum);
    for (std::size_t c = 0; c < f.cases; ++c) {
      const auto case_seed = seed + c;
      const auto report = gradient_check(variant, cfg, f.b, case_seed);
      json entries = json::array();
      for (const auto& e : report.entries) {
        entries.push_back({{"primal", e.name},
                           {"coordinates", e.coordinates},
                           {"max_rel_error", e.max_rel_error},
                           {"worst_index", e.worst_index},
                           {"analytic", e.worst_analytic},
                           {"numeric", e.worst_numeric}});
        o.csv_rows.push_back({to_string(variant), std::to_string(c), std::to_string(case_seed), e.name,
                              std::to_string(e.coordinates), num(e.max_rel_error), std::to_string(e.worst_index),
                              num(e.worst_analytic), num(e.worst_numeric)});
      }
      const double err_max = report.max_rel_error();
      worst = std::max(worst, err_max);
      const bool ok = err_max < kGradTolerance;
      if (!ok) err << "FAIL gradcheck/" << to_string(variant) << " case " << c << ": " << err_max << "\n";
      runs.push_back({{"variant", to_string(variant)},
                      {"case", c},
                      {"seed", case_seed},
                      {"max_rel_error", err_max},
                      {"passed", ok},
                      {"entries", entries}});
    }
  }
  o.passed = worst < kGradTolerance;
  err << "gradcheck: max relative error " << worst << (o.passed ? " (pass)\n" : " (FAIL)\n");
  o.result = {{"tolerance", kGradTolerance}, {"step", 1e-5}, {"max_rel_error", worst}, {"runs", runs}};
  return o;
}

Output cmd_memmodel(const Flags& f, std::ostream& err) {
  MemoryOptions options;
  options.b = f.b;
  options.h = f.h;
  options.k = f.k;
  options.scope = f.window;
  options.bytes_per_element = f.bytes;
  const auto report = memory_report(StageSpec::parse(f.stages), options);

  Output o;
  o.csv_header = {"row", "op", "k", "bytes", "gib", "gb"};
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"op", to_string(r.op)},
                    {"k", r.k},
                    {"bytes", r.bytes},
                    {"gib", r.gib()},
                    {"gb", r.gb()},
                    {"stage_bytes", r.stage_bytes}});
    o.csv_rows.push_back({csv_field(r.name), to_string(r.op), std::to_string(r.k), std::to_string(r.bytes),
                          num(r.gib()), num(r.gb())});
    err << std::left << std::setw(36) << r.name << std::fixed << std::setprecision(3) << r.gib() << " GiB\n";
  }
  err.unsetf(std::ios::floatfield);
  o.result = {{"stages", report.stages.str()}, {"rows", rows}};
  return o;
}

Output cmd_train_toy(const Flags& f, std::ostream& err) {
  const auto geometry = Geometry::parse(f.geom);
  if (geometry.kind != Geometry::Kind::kGrid) throw ConfigError("train-toy needs a grid geometry");
  ToyTaskSpec spec;
  spec.height = geometry.dims[0];
  spec.width = geometry.dims[1];
  spec.steps = f.steps;
  spec.batch = f.b;
  spec.learning_rate = f.lr;
  spec.k = f.k;
  spec.h = f.h;
  const auto mode = parse_interactions(f.mode);
  const auto report = train_toy(spec, mode, f.seed_value());

  Output o;
  o.csv_header = {"step", "train_loss", "train_accuracy", "test_accuracy"};
  json curve = json::array();
  for (const auto& e : report.curve) {
    curve.push_back({{"step", e.step},
                     {"train_loss", e.train_loss},
                     {"train_accuracy", e.train_accuracy},
                     {"test_accuracy", e.test_accuracy}});
    o.csv_rows.push_back(
        {std::to_string(e.step), num(e.train_loss), num(e.train_accuracy), num(e.test_accuracy)});
  }
  o.passed = !report.diverged;
  if (report.diverged) err << "FAIL train-toy: loss became non-finite\n";
  err << "train-toy " << f.mode << ": final test accuracy " << report.final_test_accuracy << "\n";
  o.result = {{"mode", to_string(mode)},
              {"final_test_accuracy", report.final_test_accuracy},
              {"diverged", report.diverged},
              {"curve", curve}};
  return o;
}

// ---------------------------------------------------------------------------

std::vector<std::string> replay_args(const json& config) {
  std::vector<std::string> args{"lambdanet", config.at("command").get<std::string>()};
  for (const auto& [key, value] : config.items()) {
    if (key == "command") continue;
    args.push_back("--" + key + "=" + (value.is_string() ? value.get<std::string>() : value.dump()));
  }
  return args;
}

void emit(const Output& o, const Flags& f, std::ostream& out) {
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out);
    if (!file) throw ConfigError("cannot open '" + f.out + "' for writing");
  }
  std::ostream& os = f.out.empty() ? out : file;
  if (f.format == "csv") {
    os << "# schema " << kSchemaVersion << " config " << o.config.dump() << "\n";
    for (std::size_t i = 0; i < o.csv_header.size(); ++i) os << (i ? "," : "") << o.csv_header[i];
    os << "\n";
    for (const auto& row : o.csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << "\n";
    }
    return;
  }
  json j;
  j["schema"] = kSchemaVersion;
  j["config"] = o.config;
  j["seed"] = o.config.contains("seed") ? parse_seed(o.config["seed"].get<std::string>()) : kDefaultSeed;
  j["passed"] = o.passed;
  j["nondeterministic"] = o.nondeterministic;
  j["result"] = o.result;
  os << j.dump(2) << "\n";
}

int run_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_args(std::vector<std::string>(argv, argv + argc), out, err);
}

namespace {

int run_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lambda layer kernels: verification suites, gradient checks, memory model, benchmarks"};
  app.name("lambdanet");
  // --h is the head count, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(0, 1);
  std::string replay;
  app.add_option("--replay", replay, "Re-run the config embedded in a JSON report");

  struct Command {
    CLI::App* app;
    Flags flags;
    std::unique_ptr<Binder> bind;
    std::function<Output(const Flags&, std::ostream&)> fn;
  };
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help, auto fn, auto setup) {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, help);
    c->app->set_help_flag("--help", "Print this help message and exit");
    c->bind = std::make_unique<Binder>(c->app);
    c->fn = fn;
    setup(*c->bind, c->flags);
    add_common(*c->bind, c->flags);
    commands.push_back(std::move(c));
  };

  add("verify", "Run property suites; exit 1 names each failing property", cmd_verify, [](Binder& b, Flags& f) {
    std::vector<std::string> suites = suite_names();
    suites.push_back("all");
    b.add("suite", f.suite, "Suite to run")->check(CLI::IsMember(suites));
    b.add("mutate", f.mutate, "Inject a known bug to exercise the harness")
        ->check(CLI::IsMember({"none", "content-sign"}));
    f.impl = "all";
    b.add("impl", f.impl, "Restrict the equivalence suite to one path against einsum")
        ->check(CLI::IsMember({"all", "einsum", "conv", "depthwise"}));
    add_precision(b, f);
  });
  add("bench", "Time the forward pass; median and p10/p90 over timed iterations", cmd_bench,
      [](Binder& b, Flags& f) {
        f.geom = "seq:256";
        f.scope = "15";
        f.impl = "all";
        f.k = 16;
        f.h = 4;
        f.u = 1;
        f.b = 1;
        f.d_in = 32;
        f.d_out = 64;
        b.add("sweep", f.sweep, "none, or a sequence-length sweep with fits")
            ->check(CLI::IsMember({"none", "conv", "global"}));
        b.add("variant", f.variant, "Layer variant");
        b.add("impl", f.impl, "Position path, or all three")
            ->check(CLI::IsMember({"all", "einsum", "conv", "depthwise"}));
        add_layer(b, f);
        add_precision(b, f);
        b.add("warmup", f.warmup, "Untimed iterations");
        b.add("iterations", f.iterations, "Timed iterations");
      });
  add("gradcheck", "Compare analytic gradients with central differences", cmd_gradcheck, [](Binder& b, Flags& f) {
    b.add("variant", f.variant, "Layer variant, or all");
    b.add("impl", f.impl, "Position path for the global variant")
        ->check(CLI::IsMember({"einsum", "conv", "depthwise"}));
    add_layer(b, f);
    add_precision(b, f);
    b.add("cases", f.cases, "Seeded cases per variant (seed, seed + 1, ...)");
  });
  add("memmodel", "Analytic memory of position embeddings and attention maps", cmd_memmodel,
      [](Binder& b, Flags& f) {
        const MemoryOptions defaults;
        f.b = defaults.b;
        f.h = defaults.h;
        f.k = defaults.k;
        f.window = defaults.scope;
        f.bytes = defaults.bytes_per_element;
        b.add("stages", f.stages, "Layers x spatial side per stage");
        b.add("b", f.b, "Batch size");
        b.add("k", f.k, "Query/key depth");
        b.add("h", f.h, "Heads");
        b.add("scope", f.window, "Window side of the local rows");
        b.add("bytes", f.bytes, "Bytes per element");
      });
  add("train-toy", "Train the marker-quadrant toy model with plain SGD", cmd_train_toy, [](Binder& b, Flags& f) {
    const ToyTaskSpec defaults;
    f.geom = "grid:" + std::to_string(defaults.height) + "x" + std::to_string(defaults.width);
    f.b = defaults.batch;
    f.k = defaults.k;
    f.h = defaults.h;
    f.steps = defaults.steps;
    f.lr = defaults.learning_rate;
    b.add("mode", f.mode, "Lambda terms to train with")->check(CLI::IsMember({"full", "content-only", "position-only"}));
    b.add("geom", f.geom, "Toy grid, grid:HxW");
    b.add("b", f.b, "Batch size");
    b.add("k", f.k, "Query/key depth");
    b.add("h", f.h, "Heads");
    b.add("steps", f.steps, "SGD steps");
    b.add("lr", f.lr, "Learning rate");
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (!replay.empty()) {
      if (app.get_subcommands().size() != 0) throw ConfigError("--replay takes no subcommand");
      std::ifstream in(replay);
      if (!in) throw ConfigError("cannot read '" + replay + "'");
      const auto report = json::parse(in);
      if (report.value("schema", 0) != kSchemaVersion) throw ConfigError("unsupported report schema");
      auto config = report.at("config");
      // The replayed report goes to stdout unless an output path is given later.
      config.erase("out");
      return run_args(replay_args(config), out, err);
    }
    for (const auto& c : commands) {
      if (!c->app->parsed()) continue;
      Output o = c->fn(c->flags, err);
      o.config = c->bind->record(c->app->get_name());
      emit(o, c->flags, out);
      return o.passed ? kExitPass : kExitFailure;
    }
    err << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace
}  // namespace lambdanet::cli
