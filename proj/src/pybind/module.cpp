#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rspg/bench.hpp"
#include "rspg/conformance.hpp"
#include "rspg/problems.hpp"
#include "rspg/solvers.hpp"

namespace py = pybind11;
using namespace rspg;

namespace {

Geometry geometry_from_name(const std::string& name) {
  if (name == "euclidean") return Geometry::euclidean();
  if (name == "entropy_simplex") return Geometry::entropy_simplex();
  throw std::invalid_argument("unknown geometry '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stochastic composite optimization toolkit";

  py::class_<FeasibleSet>(m, "FeasibleSet")
      .def_static("all_space", &FeasibleSet::all_space)
      .def_static("box", &FeasibleSet::box, py::arg("lower"), py::arg("upper"))
      .def_static("simplex", &FeasibleSet::simplex)
      .def_static("coordinate_box", &FeasibleSet::coordinate_box,
                  py::arg("dim"), py::arg("coord"), py::arg("lower"),
                  py::arg("upper"))
      .def("contains", &FeasibleSet::contains, py::arg("x"),
           py::arg("tol") = 1e-12);

  py::class_<SimpleTerm>(m, "SimpleTerm")
      .def_static("zero", &SimpleTerm::zero)
      .def_static("l1", &SimpleTerm::l1, py::arg("weight"))
      .def("value", &SimpleTerm::value, py::arg("x"));

  m.def(
      "bregman_divergence",
      [](const std::string& geometry, const Vector& x, const Vector& z) {
        return bregman_divergence(geometry_from_name(geometry), x, z);
      },
      py::arg("geometry"), py::arg("x"), py::arg("z"));

  m.def(
      "prox_step",
      [](const std::string& geometry, const FeasibleSet& set,
         const SimpleTerm& h, const Vector& x, const Vector& g, double gamma) {
        const auto r = prox_step(geometry_from_name(geometry), set, h, x, g,
                                 gamma);
        return py::make_tuple(r.x_plus, r.mapping);
      },
      py::arg("geometry"), py::arg("set"), py::arg("h"), py::arg("x"),
      py::arg("g"), py::arg("gamma"),
      "Generalized projection; returns (x_plus, mapping).");

  m.def(
      "gradient_mapping",
      [](const std::string& geometry, const FeasibleSet& set,
         const SimpleTerm& h, const Vector& x, const Vector& g, double gamma) {
        return gradient_mapping(geometry_from_name(geometry), set, h, x, g,
                                gamma);
      },
      py::arg("geometry"), py::arg("set"), py::arg("h"), py::arg("x"),
      py::arg("g"), py::arg("gamma"));

  py::class_<ScadParams>(m, "ScadParams")
      .def(py::init<>())
      .def_readwrite("a", &ScadParams::a)
      .def_readwrite("lambda_", &ScadParams::lambda);
  m.def("scad_smooth_derivative", &scad_smooth_derivative, py::arg("beta"),
        py::arg("params") = ScadParams{});
  m.def("scad_smooth_value", &scad_smooth_value, py::arg("beta"),
        py::arg("params") = ScadParams{});

  m.def("rspg_batch_size", &rspg_batch_size, py::arg("oracle_budget"),
        py::arg("sigma"), py::arg("lipschitz"), py::arg("d_tilde"));
  m.def("rspgf_batch_size", &rspgf_batch_size, py::arg("oracle_budget"),
        py::arg("dim"), py::arg("grad_bound"), py::arg("sigma"),
        py::arg("lipschitz"), py::arg("d_tilde"));
  m.def("rspgf_smoothing_mu", &rspgf_smoothing_mu, py::arg("d_psi_or_v"),
        py::arg("dim"), py::arg("oracle_budget"), py::arg("convex") = false);
  m.def("two_phase_num_runs", &two_phase_num_runs, py::arg("lambda_"));
  m.def("two_phase_budget", &two_phase_budget, py::arg("epsilon"),
        py::arg("lipschitz"), py::arg("d_psi"), py::arg("d_tilde"),
        py::arg("sigma"), py::arg("alpha") = 1.0);
  m.def("two_phase_post_samples", &two_phase_post_samples, py::arg("epsilon"),
        py::arg("lambda_"), py::arg("sigma"), py::arg("alpha") = 1.0);
  m.def("two_phase_post_samples_light", &two_phase_post_samples_light,
        py::arg("epsilon"), py::arg("lambda_"), py::arg("sigma"),
        py::arg("alpha") = 1.0);

  m.def(
      "termination_weights",
      [](double alpha, double lipschitz, const Vector& gammas, bool relaxed) {
        return termination_law(alpha, lipschitz, gammas, relaxed).weights;
      },
      py::arg("alpha"), py::arg("lipschitz"), py::arg("gammas"),
      py::arg("relaxed") = false);

  m.def(
      "solve_benchmark",
      [](const std::string& problem, const std::string& algorithm,
         std::size_t n, std::uint64_t budget, std::uint64_t seed,
         std::uint64_t n0, std::uint64_t s_runs, double t_fraction,
         std::uint64_t k_eval) {
        ExperimentConfig config;
        config.scenario = "api";
        config.problem = problem;
        config.n = n;
        config.algorithms = {algorithm};
        config.budgets = {budget};
        config.replications = 1;
        config.s_runs = s_runs;
        config.t_fraction = t_fraction;
        config.k_eval = k_eval;
        config.n0 = n0;
        config.seed = seed;
        const auto report = run_experiment(config, 1);
        if (report.rows.empty()) {
          throw std::runtime_error(report.skipped.empty()
                                       ? "no result produced"
                                       : report.skipped.front().reason);
        }
        const auto& row = report.rows.front();
        py::dict out;
        out["mapping_norm_sq"] = row.mapping_norm_sq;
        out["objective"] = row.objective;
        if (row.zero_ratio) out["zero_ratio"] = *row.zero_ratio;
        out["sfo_calls"] = row.sfo_calls;
        out["post_calls"] = row.post_calls;
        return out;
      },
      py::arg("problem"), py::arg("algorithm"), py::arg("n"),
      py::arg("budget"), py::arg("seed") = 0, py::arg("n0") = 200,
      py::arg("s_runs") = 5, py::arg("t_fraction") = 0.5,
      py::arg("k_eval") = 2000,
      "Run one algorithm once on a generated benchmark instance.");

  m.def(
      "run_experiment_csv",
      [](const std::string& config_text, unsigned threads) {
        const auto report =
            run_experiment(config_from_string(config_text), threads);
        return py::make_tuple(report_to_csv(report),
                              summary_to_csv(summarize(report)));
      },
      py::arg("config_text"), py::arg("threads") = 1,
      "Returns (report_csv, summary_csv) for a config in text form.");

  m.def("default_config_text",
        []() { return config_to_string(ExperimentConfig{}); });

  m.def(
      "verify",
      [](unsigned threads) {
        py::list out;
        for (const auto& result : run_all_checks(threads)) {
          out.append(py::make_tuple(result.name, result.passed, result.detail));
        }
        return out;
      },
      py::arg("threads") = 1,
      "Run the conformance checks; returns (name, passed, detail) tuples.");
}
