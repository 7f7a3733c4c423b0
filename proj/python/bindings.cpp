// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "eulerci/harness.hpp"
#include "eulerci/spectral.hpp"
#include "eulerci/verification.hpp"

namespace py = pybind11;
using namespace eulerci;

namespace
{

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Arrays are (components, n, n) or (components, n, n, n).
PeriodicField to_field(const Array &a, FieldRank rank)
{
  const int dim = static_cast<int>(a.ndim()) - 1;
  if (dim != 2 && dim != 3)
  {
    throw ConfigError("field arrays are (components, n, n) or (components, n, n, n)");
  }
  const int n = static_cast<int>(a.shape(1));
  for (int ax = 2; ax <= dim; ++ax)
  {
    if (a.shape(ax) != n)
    {
      throw ConfigError("field arrays must be cubic");
    }
  }
  PeriodicField f(TorusGrid(dim, n), rank);
  if (a.shape(0) != f.components())
  {
    throw ConfigError("expected " + std::to_string(f.components()) + " components for a " +
                      rank_name(rank) + " field");
  }
  std::copy(a.data(), a.data() + a.size(), f.data().begin());
  return f;
}

Array to_array(const PeriodicField &f)
{
  std::vector<py::ssize_t> shape{f.components()};
  for (int ax = 0; ax < f.grid().dim(); ++ax)
  {
    shape.push_back(f.grid().n());
  }
  Array out(shape);
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

FieldRank rank_for(const Array &a)
{
  const int dim = static_cast<int>(a.ndim()) - 1;
  const int c = static_cast<int>(a.shape(0));
  if (c == 1)
  {
    return FieldRank::Scalar;
  }
  if (c == dim)
  {
    return FieldRank::Vector;
  }
  if (c == dim * (dim + 1) / 2)
  {
    return FieldRank::SymTensor;
  }
  throw ConfigError("cannot infer the rank of a field with " + std::to_string(c) + " components");
}

py::object json_to_py(const nlohmann::json &j)
{
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object &o)
{
  const std::string s = py::str(py::module_::import("json").attr("dumps")(o));
  return nlohmann::json::parse(s);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "eulerci native core";
  m.attr("__version__") = "0.1.0";
  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
    "div_inverse",
    [](const Array &v) { return to_array(div_inverse(to_field(v, FieldRank::Vector))); },
    py::arg("v"), "Symmetric trace-free R with div R = v - mean v.");
  m.def(
    "leray_p", [](const Array &v) { return to_array(leray_p(to_field(v, FieldRank::Vector))); },
    py::arg("v"));
  m.def(
    "leray_q", [](const Array &v) { return to_array(leray_q(to_field(v, FieldRank::Vector))); },
    py::arg("v"));
  m.def(
    "divergence", [](const Array &f) { return to_array(divergence(to_field(f, rank_for(f)))); },
    py::arg("f"), "Divergence of a vector (scalar result) or symmetric tensor field.");

  m.def(
    "lattice_sphere",
    [](int dim, int nu) {
      std::vector<std::vector<int>> out;
      for (const auto &k : lattice_sphere(dim, nu))
      {
        out.push_back(std::vector<int>(k.begin(), k.begin() + dim));
      }
      return out;
    },
    py::arg("dim"), py::arg("nu"));

  m.def(
    "fit_scaling",
    [](const std::vector<double> &x, const std::vector<double> &y) {
      return json_to_py(fit_scaling(x, y).to_json());
    },
    py::arg("x"), py::arg("y"), "Log-log least squares: slope, intercept, r2.");

  m.def(
    "plan_system",
    [](int dim, double spread_target, int search_bound) {
      NuSearchOptions o;
      o.spread_target = spread_target;
      o.search_bound = search_bound;
      return json_to_py(plan_system(dim, o).to_json());
    },
    py::arg("dim"), py::arg("spread_target") = 1.5707963267948966,
    py::arg("search_bound") = 20000);

  m.def(
    "run_command",
    [](const std::string &name, const py::object &config, const std::string &extra) {
      const auto cfg = RunConfig::from_json(config.is_none() ? nlohmann::json::object()
                                                             : py_to_json(config));
      std::ostringstream log;
      int code = kExitConfig;
      {
        py::gil_scoped_release release;
        if (name == "plan")
        {
          code = cmd_plan(cfg, log);
        }
        else if (name == "verify")
        {
          code = cmd_verify(cfg, log);
        }
        else if (name == "step")
        {
          code = cmd_step(cfg, log);
        }
        else if (name == "run")
        {
          code = cmd_run(cfg, log);
        }
        else if (name == "export")
        {
          code = cmd_export(cfg, extra, log);
        }
        else if (name == "fit")
        {
          code = cmd_fit(cfg, extra, log);
        }
        else
        {
          log << "unknown command '" << name << "'\n";
        }
      }
      return py::make_tuple(code, log.str());
    },
    py::arg("name"), py::arg("config") = py::none(), py::arg("extra") = "",
    "Runs a harness command; returns (exit code, log). `extra` is the state "
    "directory for export and the CSV path for fit.");
}
