#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mvub/analysis.hpp"
#include "mvub/estimator.hpp"
#include "mvub/model.hpp"

namespace py = pybind11;
using namespace mvub;

namespace {

Phi moment_phi(int component, int power, int dim) {
  if (component < 1 || component > dim)
    throw std::invalid_argument("component out of range for model dimension");
  if (power < 1) throw std::invalid_argument("power must be >= 1");
  const int c = component - 1;
  return [c, power](std::span<const double> x) {
    double p = x[c];
    for (int i = 1; i < power; ++i) p *= x[c];
    return p;
  };
}

py::dict estimate_moment(const Model& model, const EstimatorConfig& config, int m,
                         std::uint64_t seed, int threads, int component, int power) {
  const Phi phi = moment_phi(component, power, model.dim);
  EstimateResult res;
  {
    py::gil_scoped_release release;
    res = estimate(model, config, phi, m, seed, threads);
  }
  py::dict out;
  out["estimate"] = res.mean;
  out["std_error"] = res.std_error;
  out["total_cost_units"] = res.total_cost_units;
  out["values"] = res.values;
  return out;
}

std::vector<double> kde_curve(const Model& model, const EstimatorConfig& config, int m,
                              std::uint64_t seed, const std::vector<double>& grid,
                              double bandwidth, int component, int threads) {
  if (component < 1 || component > model.dim)
    throw std::invalid_argument("component out of range for model dimension");
  std::vector<ReplicateResult> reps;
  {
    py::gil_scoped_release release;
    reps = run_replicates(model, config, m, seed, threads);
  }
  const auto pooled = pooled_measure(reps);
  return kde(pooled, component - 1, bandwidth, grid).values;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unbiased stationary-distribution estimation for mean-field SDEs";

  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);

  py::class_<Model>(m, "Model")
      .def_readonly("dim", &Model::dim)
      .def_readonly("x0", &Model::x0);

  py::class_<NeuronParams>(m, "NeuronParams")
      .def(py::init<>())
      .def_readwrite("V0", &NeuronParams::V0)
      .def_readwrite("sigma_V0", &NeuronParams::sigma_V0)
      .def_readwrite("a", &NeuronParams::a)
      .def_readwrite("b", &NeuronParams::b)
      .def_readwrite("c", &NeuronParams::c)
      .def_readwrite("I", &NeuronParams::I)
      .def_readwrite("b_ext", &NeuronParams::b_ext)
      .def_readwrite("w0", &NeuronParams::w0)
      .def_readwrite("sigma_w0", &NeuronParams::sigma_w0)
      .def_readwrite("V_rev", &NeuronParams::V_rev)
      .def_readwrite("a_r", &NeuronParams::a_r)
      .def_readwrite("a_d", &NeuronParams::a_d)
      .def_readwrite("T_max", &NeuronParams::T_max)
      .def_readwrite("lambda_", &NeuronParams::lambda)
      .def_readwrite("y0", &NeuronParams::y0)
      .def_readwrite("sigma_y0", &NeuronParams::sigma_y0)
      .def_readwrite("J", &NeuronParams::J)
      .def_readwrite("b_J", &NeuronParams::b_J)
      .def_readwrite("V_T", &NeuronParams::V_T)
      .def_readwrite("Gamma", &NeuronParams::Gamma)
      .def_readwrite("Lambda", &NeuronParams::Lambda);

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init([](int l_star, int l_max, int p_max, int n_base, const std::string& pmf) {
             EstimatorConfig cfg;
             cfg.l_star = l_star;
             cfg.l_max = l_max;
             cfg.p_max = p_max;
             cfg.n_base = n_base;
             if (pmf == "natural_log")
               cfg.pmf_weights = PmfWeights::NaturalLog;
             else if (pmf == "log2_squared")
               cfg.pmf_weights = PmfWeights::Log2Squared;
             else
               throw std::invalid_argument("pmf_weights: natural_log or log2_squared");
             cfg.validate();
             return cfg;
           }),
           py::arg("l_star") = 3, py::arg("l_max") = 10, py::arg("p_max") = 7,
           py::arg("n_base") = 10, py::arg("pmf_weights") = "natural_log")
      .def_readwrite("l_star", &EstimatorConfig::l_star)
      .def_readwrite("l_max", &EstimatorConfig::l_max)
      .def_readwrite("p_max", &EstimatorConfig::p_max)
      .def_readwrite("n_base", &EstimatorConfig::n_base)
      .def("particles_at", &EstimatorConfig::particles_at);

  m.def("curie_weiss", &curie_weiss, py::arg("beta") = 1.0, py::arg("k") = 0.25,
        py::arg("sigma") = 1.0, py::arg("x0") = 1.0);
  m.def("mean_field_ou", &mean_field_ou, py::arg("theta") = 1.0, py::arg("kappa") = 0.5,
        py::arg("sigma") = 1.0, py::arg("x0") = 1.0);
  m.def("mle_gaussian", &mle_gaussian, py::arg("y"));
  m.def("neuron3d", &neuron3d, py::arg("params") = NeuronParams{});

  m.def("pmf_level", &pmf_level, py::arg("config"));
  m.def("pmf_horizon", &pmf_horizon, py::arg("config"));
  m.def("expected_cost", &expected_cost, py::arg("config"));

  m.def("estimate_moment", &estimate_moment, py::arg("model"), py::arg("config"),
        py::arg("m"), py::arg("seed"), py::arg("threads") = 0, py::arg("component") = 1,
        py::arg("power") = 1,
        "Average of m independent single-term replicates of the moment functional.");

  m.def("kde_curve", &kde_curve, py::arg("model"), py::arg("config"), py::arg("m"),
        py::arg("seed"), py::arg("grid"), py::arg("bandwidth"), py::arg("component") = 1,
        py::arg("threads") = 0,
        "Pooled Gaussian-kernel density of one state component on the given grid.");

  m.def(
      "wasserstein_1d",
      [](const std::vector<double>& a, const std::vector<double>& b, int order) {
        return wasserstein_1d(a, b, order);
      },
      py::arg("a"), py::arg("b"), py::arg("order") = 2);

  m.def("contraction_trace", &contraction_diagnostic, py::arg("model"), py::arg("level"),
        py::arg("particles"), py::arg("t_max"), py::arg("x0_a"), py::arg("x0_b"),
        py::arg("seed"),
        "Per-unit-time W2 between two synchronously coupled particle systems.");

  m.def(
      "curie_weiss_stationary",
      [](double beta) {
        const auto truth = curie_weiss_stationary(beta);
        return py::make_tuple(truth.normalizer, truth.second_moment);
      },
      py::arg("beta") = 1.0,
      "Quadrature normalizer and second moment of the double-well stationary law.");
}
