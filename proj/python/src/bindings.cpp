// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "lambdanet/complexity.hpp"
#include "lambdanet/contract.hpp"
#include "lambdanet/grad.hpp"
#include "lambdanet/reference.hpp"
#include "lambdanet/suites.hpp"
#include "lambdanet/toy_task.hpp"
#include "lambdanet/variants.hpp"

namespace py = pybind11;
using namespace lambdanet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
}

Array to_numpy(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

LambdaConfig make_config(std::size_t d_in, std::size_t d_out, std::size_t k, std::size_t h, std::size_t u,
                         const std::string& geometry, const std::string& boundary,
                         const std::optional<std::string>& scope, const std::string& key_norm,
                         const std::string& impl, const std::string& interactions, bool qv_hook,
                         const std::string& intra_depth_norm) {
  LambdaConfig c;
  c.d_in = d_in;
  c.d_out = d_out;
  c.k = k;
  c.h = h;
  c.u = u;
  c.position.geometry = Geometry::parse(geometry);
  c.position.boundary = parse_boundary(boundary);
  if (scope) c.position.scope = parse_scope(*scope);
  c.key_norm = parse_key_norm(key_norm);
  c.impl = parse_position_impl(impl);
  c.interactions = parse_interactions(interactions);
  c.qv_hook = qv_hook;
  c.intra_depth_norm = parse_intra_depth_norm(intra_depth_norm);
  c.validate();
  return c;
}

std::optional<MaskSpec> make_mask(const std::optional<Array>& mask) {
  if (!mask) return std::nullopt;
  return MaskSpec{to_tensor(*mask)};
}

py::dict grads_dict(const GradBundle& g) {
  py::dict d;
  d["x"] = to_numpy(g.x);
  d["context"] = to_numpy(g.context);
  d["w_q"] = to_numpy(g.w_q);
  d["w_k"] = to_numpy(g.w_k);
  d["w_v"] = to_numpy(g.w_v);
  d["r"] = to_numpy(g.r);
  d["q_scale"] = to_numpy(g.q_scale);
  d["q_shift"] = to_numpy(g.q_shift);
  d["v_scale"] = to_numpy(g.v_scale);
  d["v_shift"] = to_numpy(g.v_shift);
  return d;
}

// Exposes a params tensor as a numpy copy with a setter.
void param_property(py::class_<LambdaParams>& cls, const char* name, Tensor LambdaParams::*member) {
  cls.def_property(
      name, [member](const LambdaParams& p) { return to_numpy(p.*member); },
      [member](LambdaParams& p, const Array& a) { p.*member = to_tensor(a); });
}

}  // namespace

PYBIND11_MODULE(_lambdanet, m) {
  m.doc() = "Lambda layer kernels, reference oracles, gradient checks and cost models";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.attr("DEFAULT_SEED") = kDefaultSeed;

  py::class_<LambdaConfig>(m, "LambdaConfig")
      .def(py::init(&make_config), py::arg("d_in"), py::arg("d_out"), py::arg("k") = 16, py::arg("h") = 4,
           py::arg("u") = 1, py::arg("geometry") = "seq:8", py::arg("boundary") = "clamped",
           py::arg("scope") = py::none(), py::arg("key_norm") = "softmax", py::arg("impl") = "einsum",
           py::arg("interactions") = "both", py::arg("qv_hook") = false, py::arg("intra_depth_norm") = "joint")
      .def_readonly("d_in", &LambdaConfig::d_in)
      .def_readonly("d_out", &LambdaConfig::d_out)
      .def_readonly("k", &LambdaConfig::k)
      .def_readonly("h", &LambdaConfig::h)
      .def_readonly("u", &LambdaConfig::u)
      .def_property_readonly("v", &LambdaConfig::v)
      .def_property_readonly("geometry", [](const LambdaConfig& c) { return c.position.geometry.str(); })
      .def_property_readonly("num_buckets", [](const LambdaConfig& c) { return num_buckets(c); })
      .def("__repr__", [](const LambdaConfig& c) {
        return "LambdaConfig(d_in=" + std::to_string(c.d_in) + ", d_out=" + std::to_string(c.d_out) +
               ", k=" + std::to_string(c.k) + ", h=" + std::to_string(c.h) + ", u=" + std::to_string(c.u) +
               ", geometry='" + c.position.geometry.str() + "')";
      });

  py::class_<LambdaParams> params(m, "LambdaParams");
  param_property(params, "w_q", &LambdaParams::w_q);
  param_property(params, "w_k", &LambdaParams::w_k);
  param_property(params, "w_v", &LambdaParams::w_v);
  param_property(params, "r", &LambdaParams::r);
  param_property(params, "q_scale", &LambdaParams::q_scale);
  param_property(params, "q_shift", &LambdaParams::q_shift);
  param_property(params, "v_scale", &LambdaParams::v_scale);
  param_property(params, "v_shift", &LambdaParams::v_shift);
  params.def("parameter_count", &LambdaParams::parameter_count);

  m.def(
      "init_params",
      [](const std::string& variant, const LambdaConfig& config, std::uint64_t seed) {
        return init_variant_params(parse_variant(variant), config, seed);
      },
      py::arg("variant"), py::arg("config"), py::arg("seed") = kDefaultSeed,
      "Seeded parameters in the layout the variant expects.");

  m.def(
      "forward",
      [](const std::string& variant, const Array& x, const Array& context, const LambdaParams& p,
         const LambdaConfig& config, const std::optional<Array>& mask) {
        const auto m = make_mask(mask);
        return to_numpy(variant_forward(parse_variant(variant), to_tensor(x), to_tensor(context), p, config,
                                        m ? &*m : nullptr));
      },
      py::arg("variant"), py::arg("x"), py::arg("context"), py::arg("params"), py::arg("config"),
      py::arg("mask") = py::none(), "Layer output [b, n, d_out].");

  m.def(
      "reference_forward",
      [](const std::string& variant, const Array& x, const Array& context, const LambdaParams& p,
         const LambdaConfig& config, const std::optional<Array>& mask) {
        const auto m = make_mask(mask);
        return to_numpy(reference::layer_forward(parse_variant(variant), to_tensor(x), to_tensor(context), p,
                                                 config, m ? &*m : nullptr));
      },
      py::arg("variant"), py::arg("x"), py::arg("context"), py::arg("params"), py::arg("config"),
      py::arg("mask") = py::none(), "Scalar-loop oracle for forward().");

  m.def(
      "backward",
      [](const std::string& variant, const Array& x, const Array& context, const LambdaParams& p,
         const LambdaConfig& config, const Array& upstream, const std::optional<Array>& mask) {
        const auto m = make_mask(mask);
        return grads_dict(backward(parse_variant(variant), to_tensor(x), to_tensor(context), p, config,
                                   to_tensor(upstream), m ? &*m : nullptr));
      },
      py::arg("variant"), py::arg("x"), py::arg("context"), py::arg("params"), py::arg("config"),
      py::arg("upstream"), py::arg("mask") = py::none(), "Gradients given dL/dY.");

  m.def(
      "gradient_check",
      [](const std::string& variant, const LambdaConfig& config, std::size_t batch, std::uint64_t seed) {
        const auto report = gradient_check(parse_variant(variant), config, batch, seed);
        py::dict out;
        py::list entries;
        for (const auto& e : report.entries) {
          py::dict d;
          d["primal"] = e.name;
          d["coordinates"] = e.coordinates;
          d["max_rel_error"] = e.max_rel_error;
          entries.append(d);
        }
        out["max_rel_error"] = report.max_rel_error();
        out["entries"] = entries;
        return out;
      },
      py::arg("variant"), py::arg("config"), py::arg("batch") = 2, py::arg("seed") = kDefaultSeed);

  m.def(
      "contract",
      [](const std::string& spec, const py::args& arrays) {
        std::vector<Tensor> ts;
        for (const auto& a : arrays) ts.push_back(to_tensor(a.cast<Array>()));
        std::vector<const Tensor*> ptrs;
        for (const auto& t : ts) ptrs.push_back(&t);
        return to_numpy(contract<double>(spec, std::span<const Tensor* const>(ptrs)));
      },
      py::arg("spec"), "Einsum-style contraction, e.g. contract('bmk,bmv->bkv', k, v).");

  m.def(
      "relative_index_table",
      [](const std::string& geometry, const std::string& boundary, const std::optional<std::string>& scope) {
        const auto g = Geometry::parse(geometry);
        std::optional<Scope> s;
        if (scope) s = parse_scope(*scope);
        return to_numpy(RelIndexMap::build(g, g, parse_boundary(boundary), s).to_tensor());
      },
      py::arg("geometry"), py::arg("boundary") = "clamped", py::arg("scope") = py::none(),
      "[n, m] bucket table, -1 where out of scope.");

  m.def("causal_mask", [](std::size_t n) { return to_numpy(build_causal_mask(n)); }, py::arg("n"));

  m.def(
      "time_cost",
      [](const std::string& op, const py::kwargs& kwargs) {
        DimSet d;
        for (const auto& [key, value] : kwargs) {
          const auto name = key.cast<std::string>();
          const auto v = value.cast<std::uint64_t>();
          if (name == "b") d.b = v;
          else if (name == "n") d.n = v;
          else if (name == "m") d.m = v;
          else if (name == "r") d.r = v;
          else if (name == "k") d.k = v;
          else if (name == "v") d.v = v;
          else if (name == "d") d.d = v;
          else if (name == "h") d.h = v;
          else if (name == "u") d.u = v;
          else if (name == "l") d.l = v;
          else if (name == "height") d.height = v;
          else if (name == "width") d.width = v;
          else throw ConfigError("unknown dimension '" + name + "'");
        }
        const auto r = time_cost(parse_op_kind(op), d);
        py::dict out;
        out["multiplies"] = r.multiplies;
        out["terms"] = r.terms;
        return out;
      },
      py::arg("op"), "Closed-form multiply count, e.g. time_cost('lambda', b=1, n=4, m=4, k=2, v=2, h=2).");

  m.def(
      "memory_report",
      [](const std::string& stages, std::uint64_t b, std::uint64_t h, std::uint64_t k) {
        MemoryOptions o;
        o.b = b;
        o.h = h;
        o.k = k;
        py::list rows;
        for (const auto& r : memory_report(StageSpec::parse(stages), o).rows) {
          py::dict d;
          d["name"] = r.name;
          d["bytes"] = r.bytes;
          d["gib"] = r.gib();
          rows.append(d);
        }
        return rows;
      },
      py::arg("stages") = default_stages().str(), py::arg("b") = 128, py::arg("h") = 8, py::arg("k") = 16);

  m.def("suite_names", &suite_names);
  m.def(
      "run_suite",
      [](const std::string& name, std::uint64_t seed) {
        SuiteOptions o;
        o.seed = seed;
        const auto report = run_suite(name, o);
        py::list props;
        for (const auto& p : report.properties) {
          py::dict d;
          d["name"] = p.name;
          d["passed"] = p.passed;
          d["worst_error"] = p.worst_error;
          d["tolerance"] = p.tolerance;
          d["cases"] = p.cases;
          d["detail"] = p.detail;
          props.append(d);
        }
        py::dict out;
        out["suite"] = report.suite;
        out["passed"] = report.passed();
        out["properties"] = props;
        return out;
      },
      py::arg("name"), py::arg("seed") = kDefaultSeed);

  m.def(
      "train_toy",
      [](const std::string& mode, std::uint64_t seed, std::size_t steps, std::size_t height, std::size_t width) {
        ToyTaskSpec spec;
        spec.steps = steps;
        spec.height = height;
        spec.width = width;
        ToyReport report;
        {
          py::gil_scoped_release release;
          report = train_toy(spec, parse_interactions(mode), seed);
        }
        py::list curve;
        for (const auto& e : report.curve) {
          py::dict d;
          d["step"] = e.step;
          d["train_loss"] = e.train_loss;
          d["test_accuracy"] = e.test_accuracy;
          curve.append(d);
        }
        py::dict out;
        out["final_test_accuracy"] = report.final_test_accuracy;
        out["diverged"] = report.diverged;
        out["curve"] = curve;
        return out;
      },
      py::arg("mode") = "full", py::arg("seed") = 1, py::arg("steps") = 2000, py::arg("height") = 8,
      py::arg("width") = 8);
}
