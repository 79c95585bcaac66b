// Copyright 2026 The qpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "qpm/optimizer.hpp"
#include "qpm/protocols.hpp"

namespace py = pybind11;
using namespace qpm;

namespace {

PureVector qubit(const Vector& v) { return PureVector::normalized(v, Dims{static_cast<int>(v.size())}); }

Matrix universal_output(const Vector& first, const Vector& second, int y) {
  const ScenarioSpec base = ScenarioSpec::stochastic_teleportation(2, 2);
  const ScenarioSpec s =
      ScenarioSpec::with_states(Dims{2, 2}, {kron(qubit(first), qubit(second))}, Dims{2}, base.targets());
  return correlations_classical(universal_protocol_2qubit(), s).at(0, y).matrix();
}

py::dict universal_fidelity() {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const CorrelationTable t = correlations_classical(universal_protocol_2qubit(), s);
  py::dict d;
  d["F_avg"] = avg_fidelity(t, s);
  d["F_worst"] = worst_fidelity(t, s);
  return d;
}

py::dict compose(const std::string& rac_name, int n, int d, bool symmetrize) {
  std::optional<RacStrategy> rac;
  if (rac_name == "box") {
    rac = rac_from_box(ns_box(n, d));
  } else if (rac_name == "random") {
    rac = random_guess_rac(n, d);
  } else {
    throw ValueError("rac must be 'box' or 'random'");
  }
  const StochasticTeleportSimulator sim = compose_stochastic_teleport(*rac, {n, d}, symmetrize);
  py::dict r;
  r["P_rac"] = rac->success_probability();
  r["F_simulated"] = sim.average_fidelity();
  r["F_formula"] = sim.formula_fidelity();
  return r;
}

template <typename Protocol>
py::dict seesaw_dict(const SeesawResult<Protocol>& res) {
  std::vector<double> fidelities;
  for (const auto& run : res.runs) fidelities.push_back(run.fidelity);
  py::dict r;
  r["best"] = res.best_run().fidelity;
  r["fidelities"] = fidelities;
  r["trace"] = res.best_run().trace;
  r["converged"] = res.best_run().converged;
  return r;
}

py::dict seesaw(int n, int d, int restarts, std::uint64_t seed, const std::string& objective,
                const std::string& message, int dc, int local_dim) {
  SeesawConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  cfg.objective = objective_from_string(objective);
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(n, d);
  const int c = dc > 0 ? dc : d * d;
  const int local = local_dim > 0 ? local_dim : d;
  if (message == "classical") {
    const auto res = [&] {
      py::gil_scoped_release release;
      return seesaw_run(s, ResourceSpec::maximally_entangled(local, c, MessageKind::kClassical), cfg);
    }();
    return seesaw_dict(res);
  }
  if (message == "quantum") {
    const auto res = [&] {
      py::gil_scoped_release release;
      return seesaw_run_quantum(s, ResourceSpec::maximally_entangled(local, c, MessageKind::kQuantum), cfg);
    }();
    return seesaw_dict(res);
  }
  throw ValueError("message must be 'classical' or 'quantum'");
}

py::dict rac_search(int n, int d, int restarts, std::uint64_t seed) {
  SeesawConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  const int q = d * d;
  const RacSeesawResult res = [&] {
    py::gil_scoped_release release;
    return rac_seesaw(n, d, max_entangled(q).projector(), q, cfg);
  }();
  py::dict r;
  r["success"] = res.success;
  r["adaptive"] = is_adaptive(res.parts);
  r["restart_values"] = res.restart_values;
  return r;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(qpm, m) {
  m.doc() = "Prepare-and-measure scenarios with quantum inputs";
  m.attr("__version__") = cli::kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ValueError>(m, "ValueError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("sic_vectors", [](int d) {
    std::vector<Vector> out;
    for (const PureVector& v : sic_povm(d).vectors) out.push_back(v.amplitudes());
    return out;
  }, py::arg("d"), "Weyl-Heisenberg SIC vectors for d in {2, 3, 4}.");
  m.def("equiangularity_deviation", [](int d) { return equiangularity_deviation(sic_povm(d)); }, py::arg("d"));
  m.def("design_residual", [](int d) { return second_moment_residual(sic_povm(d)); }, py::arg("d"));

  m.def("universal_output", &universal_output, py::arg("first"), py::arg("second"), py::arg("y"),
        "Bob's state for the two-qubit universal protocol on a product input.");
  m.def("universal_fidelity", &universal_fidelity);

  m.def("mixed_input_fidelity", &mixed_input_fidelity, py::arg("purity"));
  m.def("simulate_mixed_input_fidelity", &simulate_mixed_input_fidelity, py::arg("lam"), py::arg("samples") = 20,
        py::arg("seed") = 1);
  m.def("swap_fidelity", &swap_fidelity, py::arg("theta"));
  m.def("simulate_swap_fidelity", &simulate_swap_fidelity, py::arg("theta"), py::arg("y"));
  m.def("noisy_resource_fidelity", &noisy_resource_fidelity, py::arg("visibility"));
  m.def("rac_bound", [](int n, int d) {
    const RacBound b = rac_bound(n, d);
    return py::make_tuple(b.success, b.fidelity);
  }, py::arg("n_inputs"), py::arg("d"), "(P_bound, F_bound)");

  py::class_<NsBox>(m, "NsBox")
      .def_property_readonly("n_inputs", &NsBox::n_inputs)
      .def_property_readonly("d", &NsBox::d)
      .def_property_readonly("x_count", &NsBox::x_count)
      .def_property_readonly("denominator", &NsBox::denominator)
      .def("numerator", &NsBox::numerator, py::arg("a"), py::arg("b"), py::arg("x"), py::arg("y"))
      .def("probability", &NsBox::probability, py::arg("a"), py::arg("b"), py::arg("x"), py::arg("y"))
      .def("signaling_residual", &NsBox::signaling_residual)
      .def("normalization_residual", &NsBox::normalization_residual)
      .def("bell_value", &NsBox::bell_value);
  m.def("ns_box", &ns_box, py::arg("n_inputs"), py::arg("d"));
  m.def("uniform_box", &uniform_box, py::arg("n_inputs"), py::arg("d"));

  m.def("compose_fidelity", &compose, py::arg("rac"), py::arg("n_inputs"), py::arg("d"),
        py::arg("symmetrize") = true);
  m.def("seesaw", &seesaw, py::arg("n_inputs"), py::arg("d"), py::arg("restarts"), py::arg("seed"),
        py::arg("objective") = "average", py::arg("message") = "classical", py::arg("dc") = 0,
        py::arg("local_dim") = 0);
  m.def("rac_seesaw", &rac_search, py::arg("n_inputs"), py::arg("d"), py::arg("restarts"), py::arg("seed"));

  m.def("run_cli", &run_cli, py::arg("args"), "Runs a qpm command; returns (exit_code, stdout, stderr).");
}
