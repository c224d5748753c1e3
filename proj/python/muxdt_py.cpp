// Python bindings for the deadtime-fraction toolkit: analytic formulas,
// Monte Carlo estimation, rate solving, and the quadratic fit.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "muxdt/analytic.hpp"
#include "muxdt/dist.hpp"
#include "muxdt/simulate.hpp"
#include "muxdt/solve.hpp"

namespace py = pybind11;
using namespace muxdt;

namespace {

Family family_from_string(const std::string& name) {
  if (name == "single") return Family::Single;
  if (name == "multiplexed") return Family::Multiplexed;
  if (name == "tree") return Family::Tree;
  if (name == "reduced") return Family::Reduced;
  throw std::invalid_argument("unknown family '" + name +
                              "'; expected single, multiplexed, tree, or reduced");
}

DtfEstimate estimate_cw(double rate_lambda, const std::vector<double>& deadtimes,
                        std::int64_t n_photons, int batches, std::uint64_t seed,
                        std::uint64_t stream_id) {
  SimConfig config{CwSource(rate_lambda), DetectorPool(deadtimes), Routing::FirstLive,
                   n_photons, batches};
  return estimate_dtf(config, RandomStream(seed, stream_id));
}

DtfEstimate estimate_pulsed(double rep_rate_nu, double p_event,
                            const std::vector<double>& deadtimes,
                            std::int64_t n_pulses, int batches, std::uint64_t seed,
                            std::uint64_t stream_id) {
  SimConfig config{PulsedSource(rep_rate_nu, p_event), DetectorPool(deadtimes),
                   Routing::FirstLive, n_pulses, batches};
  return estimate_dtf(config, RandomStream(seed, stream_id));
}

}  // namespace

PYBIND11_MODULE(muxdt, m) {
  m.doc() =
      "Deadtime fraction of multiplexed photon-counting detector arrays: "
      "closed-form models, Monte Carlo simulation, and rate solving.";

  py::class_<DtfEstimate>(m, "DtfEstimate")
      .def_readonly("dtf", &DtfEstimate::dtf)
      .def_readonly("std_err", &DtfEstimate::std_err)
      .def_readonly("total_events", &DtfEstimate::total_events)
      .def_readonly("missed_events", &DtfEstimate::missed_events)
      .def_readonly("per_detector_counts", &DtfEstimate::per_detector_counts)
      .def("__repr__", [](const DtfEstimate& e) {
        return "DtfEstimate(dtf=" + std::to_string(e.dtf) +
               ", std_err=" + std::to_string(e.std_err) + ")";
      });

  py::class_<RateAtDtfResult>(m, "RateAtDtfResult")
      .def_readonly("rate", &RateAtDtfResult::rate)
      .def_readonly("target_dtf", &RateAtDtfResult::target_dtf)
      .def_readonly("bracket_lo", &RateAtDtfResult::bracket_lo)
      .def_readonly("bracket_hi", &RateAtDtfResult::bracket_hi)
      .def_readonly("iterations", &RateAtDtfResult::iterations);

  py::class_<PolyFit2>(m, "PolyFit2")
      .def_readonly("c0", &PolyFit2::c0)
      .def_readonly("c1", &PolyFit2::c1)
      .def_readonly("c2", &PolyFit2::c2)
      .def_readonly("r_squared", &PolyFit2::r_squared)
      .def_readonly("degenerate", &PolyFit2::degenerate);

  m.def("dead_pulse_count",
        [](double nu, double t_d) { return dead_pulse_count(nu, t_d).n_dead; },
        py::arg("rep_rate_nu"), py::arg("deadtime"),
        "Whole pulses a detector stays dead: Int(nu * deadtime).");

  // Distributions.
  m.def("binomial_pmf", &binomial_pmf, py::arg("n"), py::arg("trials"), py::arg("p"));
  m.def("geometric_wait_pmf", &geometric_wait_pmf, py::arg("n"), py::arg("p"));
  m.def("generalized_geometric_pmf", &generalized_geometric_pmf, py::arg("n"),
        py::arg("k"), py::arg("p"));
  m.def("geometric_binomial_identity_residual", &geometric_binomial_identity_residual,
        py::arg("k"), py::arg("n_pulses"), py::arg("p"));

  // Closed-form DTF models.
  m.def("cw_single_dtf", &cw_single_dtf, py::arg("rate_lambda"), py::arg("deadtime"));
  m.def("cw_multiplexed_dtf",
        [](double lam, double t_d, int n) {
          const auto r = cw_multiplexed_dtf(lam, t_d, n);
          return py::make_tuple(r.dtf, r.breakdown.mean_counts);
        },
        py::arg("rate_lambda"), py::arg("deadtime"), py::arg("n_detectors"),
        "Returns (dtf, per-detector mean counts over a 1 s window).");
  m.def("cw_tree_dtf", &cw_tree_dtf, py::arg("rate_lambda"), py::arg("deadtime"),
        py::arg("n_detectors"));
  m.def("cw_reduced_dtf", &cw_reduced_dtf, py::arg("rate_lambda"), py::arg("deadtime"),
        py::arg("reduction_factor"));
  m.def("cw_effective_deadtimes",
        [](double lam, double t_d, int n) {
          return cw_effective_deadtimes(lam, t_d, n).values;
        },
        py::arg("rate_lambda"), py::arg("deadtime"), py::arg("n_detectors"));

  m.def("pulsed_single_dtf",
        [](double p, std::int64_t nd) { return pulsed_single_dtf(p, DeadPulseCount{nd}); },
        py::arg("p_event"), py::arg("n_dead"));
  m.def("pulsed_multiplexed_dtf",
        [](double p, std::int64_t nd, int n) {
          const auto r = pulsed_multiplexed_dtf(p, DeadPulseCount{nd}, n);
          return py::make_tuple(r.dtf, r.breakdown.mean_counts);
        },
        py::arg("p_event"), py::arg("n_dead"), py::arg("n_detectors"));
  m.def("pulsed_tree_dtf",
        [](double p, std::int64_t nd, int n) {
          return pulsed_tree_dtf(p, DeadPulseCount{nd}, n);
        },
        py::arg("p_event"), py::arg("n_dead"), py::arg("n_detectors"));
  m.def("pulsed_reduced_dtf", &pulsed_reduced_dtf, py::arg("p_event"),
        py::arg("rep_rate_nu"), py::arg("deadtime"), py::arg("reduction_factor"));
  m.def("pulsed_effective_deadtimes",
        [](double p, std::int64_t nd, int n) {
          return pulsed_effective_deadtimes(p, DeadPulseCount{nd}, n).values;
        },
        py::arg("p_event"), py::arg("n_dead"), py::arg("n_detectors"));

  // Monte Carlo.
  m.def("estimate_cw_dtf", &estimate_cw, py::arg("rate_lambda"), py::arg("deadtimes"),
        py::arg("n_photons") = 1000000, py::arg("batches") = 10, py::arg("seed") = 0,
        py::arg("stream_id") = 0,
        "Simulate the switched cascade for a CW Poisson source.");
  m.def("estimate_pulsed_dtf", &estimate_pulsed, py::arg("rep_rate_nu"),
        py::arg("p_event"), py::arg("deadtimes"), py::arg("n_pulses") = 1000000,
        py::arg("batches") = 10, py::arg("seed") = 0, py::arg("stream_id") = 0,
        "Simulate the switched cascade for a pulsed source.");

  // Solvers.
  m.def("cw_rate_at_dtf",
        [](const std::string& family, double t_d, int n, double target) {
          return cw_rate_at_dtf(family_from_string(family), t_d, n, target);
        },
        py::arg("family"), py::arg("deadtime"), py::arg("n_detectors"),
        py::arg("target"));
  m.def("pulsed_rate_at_dtf",
        [](const std::string& family, double nu, double t_d, int n, double target) {
          return pulsed_rate_at_dtf(family_from_string(family), nu, t_d, n, target);
        },
        py::arg("family"), py::arg("rep_rate_nu"), py::arg("deadtime"),
        py::arg("n_detectors"), py::arg("target"));
  m.def("speedup_curve",
        [](const std::string& mode, const std::string& family, double t_d, double nu,
           double target, int n_max) {
          const Mode m_ = mode == "cw" ? Mode::Cw : Mode::Pulsed;
          std::vector<py::tuple> out;
          for (const auto& p :
               speedup_curve(m_, family_from_string(family), t_d, nu, target, n_max))
            out.push_back(py::make_tuple(p.n_detectors, p.rate, p.speedup));
          return out;
        },
        py::arg("mode"), py::arg("family"), py::arg("deadtime"),
        py::arg("rep_rate_nu"), py::arg("target"), py::arg("n_max"));
  m.def("fit_poly2",
        [](const std::vector<std::pair<double, double>>& points) {
          return fit_poly2(points);
        },
        py::arg("points"));
}
