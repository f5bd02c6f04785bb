#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "eprauth/analysis.hpp"
#include "eprauth/cli.hpp"
#include "eprauth/montecarlo.hpp"

namespace py = pybind11;
using namespace eprauth;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
  const std::string text = py::module_::import("json").attr("dumps")(o).cast<std::string>();
  return nlohmann::json::parse(text);
}

ResponseEnsemble ensemble_from(const std::vector<std::tuple<double, Complex, Complex>>& items) {
  ResponseEnsemble out;
  for (const auto& [p, a, b] : items) out.push_back({p, Qubit{a, b}});
  return out;
}

Labels register_labels(Eigen::Index dim) {
  Labels labels;
  for (Eigen::Index d = 1; d < dim; d *= 2)
    labels.push_back({Party::Eve, static_cast<std::uint32_t>(labels.size())});
  if ((Eigen::Index{1} << labels.size()) != dim) throw QuantumError("dimension must be a power of two");
  return labels;
}

MixedState as_state(const Matrix& m) {
  if (m.rows() != m.cols()) throw QuantumError("density matrix must be square");
  return MixedState::make(register_labels(m.rows()), m);
}

py::object estimate_dict(const Estimate& e) { return to_python(to_json(e)); }

}  // namespace

PYBIND11_MODULE(eprauth, m) {
  m.doc() = "EPR-pair quantum authentication simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<QuantumError>(m, "QuantumError", PyExc_ValueError);

  m.def("p1", &p1, py::arg("theta"));
  m.def("p2", &p2, py::arg("theta"));
  m.def("ghz_detection", &ghz_detection, py::arg("theta"));
  m.def("detection_bound", &detection_bound, py::arg("k_prime"));
  m.def(
      "ghz_detection_numeric",
      [](double theta, const std::string& ensemble) {
        return ghz_detection_numeric(theta, ensemble == "real" ? ChallengeEnsemble::RealAmplitude
                                                               : ChallengeEnsemble::Haar);
      },
      py::arg("theta"), py::arg("ensemble") = "haar");

  m.def(
      "eq7_fidelity",
      [](Complex a, Complex b, const std::vector<std::tuple<double, Complex, Complex>>& ens) {
        return eq7_fidelity(a, b, ensemble_from(ens));
      },
      py::arg("a"), py::arg("b"), py::arg("ensemble"),
      "ensemble: list of (p, a', b').");
  m.def(
      "impersonation_pass_probability",
      [](Complex a, Complex b, const std::vector<std::tuple<double, Complex, Complex>>& ens) {
        return impersonation_pass_probability({1, a, b}, ensemble_from(ens));
      },
      py::arg("a"), py::arg("b"), py::arg("ensemble"));

  m.def("optimal_fixed_angle", [] {
    const OptimalAngle r = optimal_fixed_angle();
    py::dict d;
    d["theta"] = r.theta;
    d["cos_values"] = r.cos_values;
    d["P"] = r.P;
    d["residual"] = r.residual;
    return d;
  });
  m.def(
      "maximize_key_steal",
      [](double theta, int grid) {
        const KeyStealOptimum r = maximize_key_steal(theta, grid);
        py::dict d;
        d["fidelity"] = r.fidelity;
        d["phi1"] = r.phi1;
        d["phi2"] = r.phi2;
        return d;
      },
      py::arg("theta"), py::arg("grid") = 360);
  m.def("fixed_angle_key_steal", &fixed_angle_key_steal, py::arg("theta"), py::arg("phi1"),
        py::arg("phi2"));
  m.def(
      "quarter_pi_key_steal",
      [](double theta, Complex a, Complex b) {
        const KeyStealOutcome r = quarter_pi_key_steal(theta, {1, a, b});
        py::dict d;
        d["eve_fidelity"] = r.eve_fidelity;
        d["bob_pass_probability"] = r.bob_pass_probability;
        d["precondition_met"] = r.precondition_met;
        return d;
      },
      py::arg("theta"), py::arg("a"), py::arg("b"));
  m.def(
      "robustness_bounds",
      [](double epsilon, const Matrix& rho1, double theta, Complex a, Complex b) {
        const RobustnessReport r = robustness_bounds(epsilon, rho1, theta, {1, a, b});
        py::dict d;
        d["trace_distance_bound"] = r.trace_distance_bound;
        d["failure_prob_bound"] = r.failure_prob_bound;
        d["failure_probability"] = r.failure_probability;
        d["failure_probability_average"] = r.failure_probability_average;
        d["distance_before"] = r.distance_before;
        d["distance_after"] = r.distance_after;
        d["fidelity_before"] = r.fidelity_before;
        d["fidelity_after"] = r.fidelity_after;
        return d;
      },
      py::arg("epsilon"), py::arg("rho1"), py::arg("theta") = 0.0, py::arg("a") = Complex(1.0),
      py::arg("b") = Complex(0.0));

  m.def(
      "fidelity", [](const Matrix& a, const Matrix& b) { return fidelity(as_state(a), as_state(b)); },
      py::arg("rho"), py::arg("sigma"), "Squared Uhlmann fidelity of two density matrices.");
  m.def(
      "trace_distance",
      [](const Matrix& a, const Matrix& b) { return trace_distance(as_state(a), as_state(b)); },
      py::arg("rho"), py::arg("sigma"), "Tr|rho - sigma| (no factor 1/2).");

  m.def(
      "run_session",
      [](const py::object& scenario, std::optional<std::uint64_t> seed) {
        const ScenarioFile f = parse_scenario(from_python(scenario), seed);
        AuthSession session(f.scenario.session);
        std::unique_ptr<Eavesdropper> eve;
        if (f.scenario.strategy) eve = std::make_unique<Eavesdropper>(*f.scenario.strategy);
        const bool two_phase = f.scenario.strategy && uses_ghz_share(f.scenario.strategy->kind);
        const int rounds = f.rounds.value_or(two_phase ? 2 : 1);
        py::list out;
        for (int k = 0; k < rounds; ++k) {
          const RoundResult r = session.run_round(eve.get());
          out.append(to_python(to_json(r)));
          if (r.verdict == Verdict::Aborted) break;
        }
        return out;
      },
      py::arg("scenario"), py::arg("seed") = py::none(),
      "Runs a scenario dict; returns one transcript dict per round.");
  m.def(
      "estimate",
      [](const py::object& scenario, std::optional<std::uint64_t> seed, std::optional<int> trials,
         unsigned threads) {
        const ScenarioFile f = parse_scenario(from_python(scenario), seed, trials);
        py::list out;
        if (f.sweep_thetas.empty()) {
          out.append(estimate_dict(run(f.scenario, f.seed, threads)));
        } else {
          for (const auto& e : sweep(f.scenario, f.sweep_thetas, f.seed, threads))
            out.append(estimate_dict(e));
        }
        return out;
      },
      py::arg("scenario"), py::arg("seed") = py::none(), py::arg("trials") = py::none(),
      py::arg("threads") = 0u, "Monte Carlo estimate(s) for a scenario dict.");
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
