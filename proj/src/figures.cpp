#include "muxdt/figures.hpp"

#include <cmath>
#include <stdexcept>

namespace muxdt {

namespace {

constexpr double kDeadtime = 50e-9;
constexpr double kTarget = 0.10;
constexpr double kNu82 = 82e6;
constexpr double kNu410 = 410e6;

// Speedup relative to N = 1. Tree fan-out scales by exactly N in both
// modes; the CW reduced detector likewise; the pulsed reduced detector
// scales by the exact dead-pulse-count ratio.
double exact_speedup(Mode mode, Family family, double deadtime, double nu, int n,
                     double rate, double rate_1) {
  if (family == Family::Tree) return static_cast<double>(n);
  if (family == Family::Reduced) {
    if (mode == Mode::Cw) return static_cast<double>(n);
    const double full = static_cast<double>(dead_pulse_count(nu, deadtime).n_dead);
    const double reduced =
        static_cast<double>(dead_pulse_count(nu, deadtime / n).n_dead);
    return full / reduced;
  }
  return rate / rate_1;
}

SweepSpec curve_spec(Mode mode, Family family, int n, double deadtime, double nu,
                     const GridSpec& grid, Engine engine, const McParams& mc,
                     int workers) {
  SweepSpec spec{mode, engine, family, grid, DetectorPool::homogeneous(n, deadtime),
                 nu, mc, workers};
  return spec;
}

// Curves for N = 1..n_max plus a distinguished baseline curve.
FigureDataset dtf_curves(Mode mode, int n_max, double deadtime, double nu,
                         const GridSpec& grid, Engine engine, const McParams& mc,
                         int workers, Family baseline_family, int baseline_n,
                         double baseline_deadtime) {
  FigureDataset ds;
  ds.name = "curves";
  std::uint64_t sub = 0;
  const RandomStream root(mc.seed, 0);
  for (int n = 1; n <= n_max; ++n) {
    const auto spec = curve_spec(mode, Family::Multiplexed, n, deadtime, nu, grid,
                                 engine, mc, workers);
    auto rows = run_dtf_curve(spec, root.substream(sub++));
    ds.curve_rows.insert(ds.curve_rows.end(), rows.begin(), rows.end());
  }
  const auto baseline = curve_spec(mode, baseline_family, baseline_n,
                                   baseline_deadtime, nu, grid, engine, mc, workers);
  auto rows = run_dtf_curve(baseline, root.substream(sub++));
  ds.curve_rows.insert(ds.curve_rows.end(), rows.begin(), rows.end());
  return ds;
}

// R(DTF=target) rows for one family over N = 1..n_max; unreachable
// targets produce NaN rows. Closed-form families report their exact
// speedups rather than re-dividing the rates.
std::vector<RateRow> rate_rows(Mode mode, Family family, double deadtime, double nu,
                               double target, int n_max) {
  std::vector<RateRow> rows;
  double rate_1 = std::nan("");
  for (int n = 1; n <= n_max; ++n) {
    RateRow row;
    row.mode = mode;
    row.family = family;
    row.n_detectors = n;
    row.target_dtf = target;
    try {
      const RateAtDtfResult r =
          mode == Mode::Cw ? cw_rate_at_dtf(family, deadtime, n, target)
                           : pulsed_rate_at_dtf(family, nu, deadtime, n, target);
      row.rate = mode == Mode::Pulsed ? r.rate * nu : r.rate;
      row.iterations = r.iterations;
      if (n == 1) rate_1 = row.rate;
      row.speedup = exact_speedup(mode, family, deadtime, nu, n, row.rate, rate_1);
    } catch (const BracketError&) {
      row.rate = std::nan("");
      row.speedup = std::nan("");
    }
    rows.push_back(row);
  }
  return rows;
}

FigureData fig3a(Engine engine, const McParams& mc, int workers) {
  FigureData fig{"fig3a", {}};
  const GridSpec grid{true, 1e5, 1e10, 61};
  fig.datasets.push_back(dtf_curves(Mode::Cw, 12, kDeadtime, 0.0, grid, engine, mc,
                                    workers, Family::Single, 1, 5e-9));
  return fig;
}

FigureData fig3b() {
  FigureData fig{"fig3b", {}};
  FigureDataset rates;
  rates.name = "rates";
  auto mux = rate_rows(Mode::Cw, Family::Multiplexed, kDeadtime, 0.0, kTarget, 12);
  auto tree = rate_rows(Mode::Cw, Family::Tree, kDeadtime, 0.0, kTarget, 12);
  rates.rate_rows = mux;
  rates.rate_rows.insert(rates.rate_rows.end(), tree.begin(), tree.end());
  fig.datasets.push_back(std::move(rates));

  std::vector<std::pair<double, double>> points;
  for (const auto& row : mux)
    points.emplace_back(static_cast<double>(row.n_detectors), row.rate);
  FigureDataset fit;
  fit.name = "fit";
  fit.fit = fit_poly2(points);
  fig.datasets.push_back(std::move(fit));
  return fig;
}

FigureData fig5(const std::string& name, double nu, Engine engine, const McParams& mc,
                int workers) {
  FigureData fig{name, {}};
  const GridSpec grid{false, 0.01, 1.0, 100};
  // Baseline: deadtime reduced 4x to 12.5 ns.
  fig.datasets.push_back(dtf_curves(Mode::Pulsed, 5, kDeadtime, nu, grid, engine, mc,
                                    workers, Family::Reduced, 4, kDeadtime));
  return fig;
}

FigureData fig6(const std::string& name, double nu) {
  FigureData fig{name, {}};
  FigureDataset rates;
  rates.name = "rates";
  for (Family family : {Family::Multiplexed, Family::Reduced, Family::Tree}) {
    auto rows = rate_rows(Mode::Pulsed, family, kDeadtime, nu, kTarget, 5);
    rates.rate_rows.insert(rates.rate_rows.end(), rows.begin(), rows.end());
  }
  fig.datasets.push_back(std::move(rates));
  return fig;
}

}  // namespace

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig3a", "fig3b", "fig5a",
                                                 "fig5b", "fig6a", "fig6b"};
  return names;
}

FigureData build_figure(const std::string& name, Engine engine, const McParams& mc,
                        int workers) {
  if (name == "fig3a") return fig3a(engine, mc, workers);
  if (name == "fig3b") return fig3b();
  if (name == "fig5a") return fig5(name, kNu82, engine, mc, workers);
  if (name == "fig5b") return fig5(name, kNu410, engine, mc, workers);
  if (name == "fig6a") return fig6(name, kNu82);
  if (name == "fig6b") return fig6(name, kNu410);
  throw std::invalid_argument("unknown figure '" + name +
                              "'; valid names: fig3a fig3b fig5a fig5b fig6a fig6b");
}

}  // namespace muxdt
