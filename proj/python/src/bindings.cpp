#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crpslearn/baselines.hpp"
#include "crpslearn/boa.hpp"
#include "crpslearn/errors.hpp"
#include "crpslearn/evaluate.hpp"
#include "crpslearn/loss.hpp"
#include "crpslearn/normal.hpp"
#include "crpslearn/simulate.hpp"
#include "crpslearn/spline.hpp"
#include "crpslearn/tuning.hpp"

namespace py = pybind11;
using namespace crpslearn;

namespace {

ProbGrid to_grid(const std::vector<double>& probs) { return ProbGrid(probs); }

std::shared_ptr<const BasisSystem> make_basis(const ProbGrid& g, const std::string& kind, double knot_distance,
                                              int degree, double lambda, double alpha) {
  BasisSystem sys;
  if (kind == "pointwise") {
    sys = identity_basis(g);
  } else if (kind == "constant") {
    sys = constant_basis(g);
  } else if (kind == "bspline") {
    sys = bspline_basis(g, knot_distance, degree);
  } else {
    throw InputError("unknown basis '" + kind + "' (expected pointwise, constant or bspline)");
  }
  if (lambda > 0.0) add_smoother(sys, lambda, alpha);
  return std::make_shared<const BasisSystem>(std::move(sys));
}

BasisChoice basis_choice(const std::string& kind) {
  if (kind == "pointwise") return BasisChoice::pointwise;
  if (kind == "constant") return BasisChoice::constant;
  if (kind == "bspline") return BasisChoice::bspline;
  throw InputError("unknown basis '" + kind + "' (expected pointwise, constant or bspline)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Online aggregation of quantile forecasts";

  static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  m.def("percentiles", [] {
    const auto g = ProbGrid::percentiles();
    return std::vector<double>(g.probs().begin(), g.probs().end());
  });
  m.def("normal_quantile", &normal_quantile, py::arg("p"));
  m.def("pinball", py::overload_cast<double, double, double>(&pinball), py::arg("q"), py::arg("y"), py::arg("p"));
  m.def(
      "crps_grid",
      [](const Vector& q, double y, const std::vector<double>& grid) { return crps_grid(q, y, to_grid(grid)); },
      py::arg("quantiles"), py::arg("y"), py::arg("grid"));
  m.def("combine_sorted", &combine_sorted, py::arg("weights"), py::arg("experts"));
  m.def(
      "crps_series",
      [](const Matrix& forecasts, const std::vector<double>& y, const std::vector<double>& grid) {
        ObservationStream obs;
        obs.y = y;
        return crps_series(forecasts, obs, to_grid(grid)).values;
      },
      py::arg("forecasts"), py::arg("y"), py::arg("grid"));
  m.def(
      "dm_test",
      [](const std::vector<double>& a, const std::vector<double>& b, std::size_t lag, bool small_sample) {
        LossSeries la{a, "a"}, lb{b, "b"};
        const auto r = dm_test(la, lb, {lag, small_sample});
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("loss_a"), py::arg("loss_b"), py::arg("lag") = 0, py::arg("small_sample") = false,
      "Diebold-Mariano test on a - b. Returns (statistic, one-sided p-value).");
  m.def(
      "expert_slab",
      [](const std::vector<double>& grid) { return expert_slab(simulation_experts(), to_grid(grid)); },
      py::arg("grid"), "Quantiles of the two simulation experts N(-1, 1) and N(3, 4).");
  m.def(
      "simulate_static",
      [](std::size_t horizon, std::uint64_t seed) {
        Rng rng(derive_seed(seed, 0));
        return dgp_static_sample(horizon, rng).y;
      },
      py::arg("T"), py::arg("seed"));
  m.def(
      "simulate_drifting",
      [](std::size_t horizon, std::uint64_t seed) {
        Rng rng(derive_seed(seed, 0));
        const auto s = dgp_drifting_sample(horizon, rng);
        return py::make_tuple(s.obs.y, s.location);
      },
      py::arg("T"), py::arg("seed"), "Returns (observations, observation means).");

  py::class_<OnlineCombiner>(m, "Combiner")
      .def("predict", &OnlineCombiner::predict, py::arg("experts"),
           "Combined sorted quantiles for an M x K expert slab.")
      .def("update", &OnlineCombiner::update, py::arg("experts"), py::arg("y"))
      .def_property_readonly("weights", [](const OnlineCombiner& c) { return c.weights().weights; });

  m.def(
      "naive",
      [](Eigen::Index m_size, Eigen::Index k) -> std::unique_ptr<OnlineCombiner> {
        return std::make_unique<NaiveCombiner>(m_size, k);
      },
      py::arg("M"), py::arg("K"));
  m.def(
      "boa",
      [](const std::vector<double>& grid, std::size_t k, const std::string& basis, double knot_distance, int degree,
         double lambda, double alpha, double forget, double fixed_share, double soft_threshold,
         double hard_threshold) -> std::unique_ptr<OnlineCombiner> {
        const ProbGrid g = to_grid(grid);
        BoaConfig c;
        c.basis = make_basis(g, basis, knot_distance, degree, lambda, alpha);
        c.lambda = lambda;
        c.alpha = alpha;
        c.forget = forget;
        c.fixed_share = fixed_share;
        c.soft_threshold = soft_threshold;
        c.hard_threshold = hard_threshold;
        return std::make_unique<BoaLearner>(std::move(c), g, k);
      },
      py::arg("grid"), py::arg("K"), py::arg("basis") = "pointwise", py::arg("knot_distance") = 0.1,
      py::arg("degree") = 3, py::arg("lam") = 0.0, py::arg("alpha") = 0.5, py::arg("forget") = 0.0,
      py::arg("fixed_share") = 0.0, py::arg("soft_threshold") = 0.0, py::arg("hard_threshold") = 0.0);
  m.def(
      "ewa",
      [](const std::vector<double>& grid, std::size_t k, double eta, bool gradient) -> std::unique_ptr<OnlineCombiner> {
        EwaConfig c;
        c.eta = eta;
        c.gradient = gradient;
        return std::make_unique<EwaLearner>(std::move(c), to_grid(grid), k);
      },
      py::arg("grid"), py::arg("K"), py::arg("eta") = 1.0, py::arg("gradient") = true);
  m.def(
      "boa_grid",
      [](const std::vector<double>& grid, std::size_t k, const std::string& basis, std::vector<double> lambdas,
         std::vector<double> forgets, double alpha) -> std::unique_ptr<OnlineCombiner> {
        BoaGridSpec spec;
        spec.basis = basis_choice(basis);
        spec.lambdas = std::move(lambdas);
        spec.forgets = std::move(forgets);
        spec.alpha = alpha;
        return std::make_unique<TuningGrid>(make_boa_grid(to_grid(grid), k, spec));
      },
      py::arg("grid"), py::arg("K"), py::arg("basis") = "pointwise", py::arg("lambdas") = std::vector<double>{0.0},
      py::arg("forgets") = std::vector<double>{0.0}, py::arg("alpha") = 0.5,
      "Online selection over a grid of BOA configurations by cumulative CRPS.");
}
