#include "muxdt/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "muxdt/analytic.hpp"
#include "muxdt/simulate.hpp"

namespace muxdt {

std::string to_string(Mode mode) { return mode == Mode::Cw ? "cw" : "pulsed"; }

std::string to_string(Family family) {
  switch (family) {
    case Family::Single: return "single";
    case Family::Multiplexed: return "multiplexed";
    case Family::Tree: return "tree";
    case Family::Reduced: return "reduced";
  }
  return "?";
}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Analytic: return "analytic";
    case Engine::MonteCarlo: return "montecarlo";
    case Engine::Both: return "both";
  }
  return "?";
}

std::vector<double> make_grid(const GridSpec& grid) {
  if (grid.points < 2)
    throw std::invalid_argument("grid: need at least 2 points");
  if (!std::isfinite(grid.start) || !std::isfinite(grid.stop) || grid.start > grid.stop)
    throw std::invalid_argument("grid: bad endpoints");
  if (grid.log_scale && (grid.start <= 0.0 || grid.stop <= 0.0))
    throw std::invalid_argument("grid: log grids require positive endpoints");

  std::vector<double> values(static_cast<std::size_t>(grid.points));
  const double n1 = static_cast<double>(grid.points - 1);
  if (grid.log_scale) {
    const double la = std::log(grid.start), lb = std::log(grid.stop);
    for (int i = 0; i < grid.points; ++i)
      values[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / n1);
  } else {
    for (int i = 0; i < grid.points; ++i)
      values[static_cast<std::size_t>(i)] = grid.start + (grid.stop - grid.start) * i / n1;
  }
  values.front() = grid.start;
  values.back() = grid.stop;
  return values;
}

GridSpec parse_grid(const std::string& text) {
  GridSpec grid;
  char kind[4] = {0};
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%3[a-z]:%lf:%lf:%d%n", kind, &grid.start, &grid.stop,
                  &grid.points, &consumed) != 4 ||
      consumed != static_cast<int>(text.size()))
    throw std::invalid_argument(
        "grid: expected log:<start>:<stop>:<points> or lin:<start>:<stop>:<points>");
  const std::string k = kind;
  if (k == "log")
    grid.log_scale = true;
  else if (k == "lin")
    grid.log_scale = false;
  else
    throw std::invalid_argument("grid: scale must be 'log' or 'lin'");
  make_grid(grid);  // validate eagerly
  return grid;
}

namespace {

double analytic_dtf(const SweepSpec& spec, double x) {
  const double t_d = spec.pool.homogeneous_deadtime();
  const int n = spec.pool.size();
  if (spec.mode == Mode::Cw) {
    switch (spec.family) {
      case Family::Single: return cw_single_dtf(x, t_d);
      case Family::Multiplexed: return cw_multiplexed_dtf(x, t_d, n).dtf;
      case Family::Tree: return cw_tree_dtf(x, t_d, n);
      case Family::Reduced: return cw_reduced_dtf(x, t_d, n);
    }
  } else {
    const auto n_d = dead_pulse_count(spec.rep_rate_nu, t_d);
    switch (spec.family) {
      case Family::Single: return pulsed_single_dtf(x, n_d);
      case Family::Multiplexed: return pulsed_multiplexed_dtf(x, n_d, n).dtf;
      case Family::Tree: return pulsed_tree_dtf(x, n_d, n);
      case Family::Reduced: return pulsed_reduced_dtf(x, spec.rep_rate_nu, t_d, n);
    }
  }
  throw std::invalid_argument("sweep: unknown family");
}

// Pool and routing actually simulated for the family.
SimConfig mc_config(const SweepSpec& spec, double x) {
  DetectorPool pool = spec.pool;
  Routing routing = Routing::FirstLive;
  switch (spec.family) {
    case Family::Single:
      pool = DetectorPool({spec.pool.deadtimes().front()});
      break;
    case Family::Reduced:
      pool = DetectorPool({spec.pool.homogeneous_deadtime() / spec.pool.size()});
      break;
    case Family::Tree:
      routing = Routing::UniformRandom;
      break;
    case Family::Multiplexed:
      break;
  }
  SourceModel source =
      spec.mode == Mode::Cw
          ? SourceModel(CwSource(x))
          : SourceModel(PulsedSource(spec.rep_rate_nu, x));
  return SimConfig{std::move(source), std::move(pool), routing, spec.mc.n_events,
                   spec.mc.batches};
}

void validate_spec(const SweepSpec& spec) {
  make_grid(spec.grid);
  if (spec.mode == Mode::Pulsed) {
    if (!std::isfinite(spec.rep_rate_nu) || spec.rep_rate_nu <= 0.0)
      throw std::invalid_argument("sweep: pulsed mode needs a repetition rate > 0");
    if (spec.grid.start < 0.0 || spec.grid.stop > 1.0)
      throw std::invalid_argument("sweep: pulsed grid is an event probability in [0, 1]");
  }
  const bool needs_analytic = spec.engine != Engine::MonteCarlo;
  if (needs_analytic && !spec.pool.is_homogeneous())
    throw std::invalid_argument("sweep: analytic engine requires a homogeneous pool");
  if (!spec.pool.is_homogeneous() &&
      (spec.family == Family::Single || spec.family == Family::Reduced))
    throw std::invalid_argument("sweep: single/reduced families require a homogeneous pool");
  if (spec.engine != Engine::Analytic && spec.mc.batches < 2)
    throw std::invalid_argument("sweep: Monte Carlo needs at least 2 batches");
}

}  // namespace

std::vector<CurveRow> run_dtf_curve(const SweepSpec& spec, const RandomStream& base) {
  validate_spec(spec);
  const auto grid = make_grid(spec.grid);
  const bool with_analytic = spec.engine != Engine::MonteCarlo;
  const bool with_mc = spec.engine != Engine::Analytic;
  const int rows_per_point = (with_analytic ? 1 : 0) + (with_mc ? 1 : 0);
  const double deadtime_col =
      spec.pool.is_homogeneous() ? spec.pool.homogeneous_deadtime()
                                 : std::nan("");
  const double nu_col = spec.mode == Mode::Pulsed ? spec.rep_rate_nu : 0.0;

  CurveRow proto;
  proto.mode = spec.mode;
  proto.family = spec.family;
  proto.n_detectors = spec.family == Family::Single ? 1 : spec.pool.size();
  proto.deadtime_s = deadtime_col;
  proto.nu_hz = nu_col;
  proto.seed = spec.mc.seed;

  std::vector<CurveRow> rows(grid.size() * static_cast<std::size_t>(rows_per_point),
                             proto);
  parallel_for(static_cast<int>(grid.size()), spec.workers, [&](int i) {
    const double x = grid[static_cast<std::size_t>(i)];
    std::size_t slot = static_cast<std::size_t>(i) * static_cast<std::size_t>(rows_per_point);
    if (with_analytic) {
      CurveRow& row = rows[slot++];
      row.rate_or_p = x;
      row.engine = Engine::Analytic;
      row.dtf = analytic_dtf(spec, x);
    }
    if (with_mc) {
      CurveRow& row = rows[slot];
      row.rate_or_p = x;
      row.engine = Engine::MonteCarlo;
      if (spec.mode == Mode::Cw && x == 0.0) {
        row.n_events = 0;  // no photons to draw
      } else {
        const DtfEstimate est =
            estimate_dtf(mc_config(spec, x), base.substream(static_cast<std::uint64_t>(i)));
        row.dtf = est.dtf;
        row.std_err = est.std_err;
        row.n_events = spec.mc.n_events;
      }
    }
  });
  return rows;
}

std::vector<CurveRow> run_dtf_curve(const SweepSpec& spec) {
  return run_dtf_curve(spec, RandomStream(spec.mc.seed, 0));
}

std::string csv_num(double v) {
  char buf[40];
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

std::string csv_int(std::int64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  return buf;
}

std::string csv_uint(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::ordered_json json_field(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

}  // namespace

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << kCurveHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << to_string(r.family) << ',' << r.n_detectors << ','
        << csv_num(r.deadtime_s) << ',' << csv_num(r.rate_or_p) << ','
        << csv_num(r.nu_hz) << ',' << to_string(r.engine) << ',' << csv_num(r.dtf)
        << ',' << csv_num(r.std_err) << ',' << csv_int(r.n_events) << ','
        << csv_uint(r.seed) << '\n';
  }
}

void write_curve_json(std::ostream& out, const std::vector<CurveRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(r.mode);
    j["family"] = to_string(r.family);
    j["n_detectors"] = r.n_detectors;
    j["deadtime_s"] = json_field(r.deadtime_s);
    j["rate_or_p"] = r.rate_or_p;
    j["nu_hz"] = r.nu_hz;
    j["engine"] = to_string(r.engine);
    j["dtf"] = r.dtf;
    j["std_err"] = r.std_err;
    j["n_events"] = r.n_events;
    j["seed"] = r.seed;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows) {
  out << kRateHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << to_string(r.family) << ',' << r.n_detectors << ','
        << csv_num(r.target_dtf) << ',' << csv_num(r.rate) << ',' << csv_num(r.speedup)
        << ',' << r.iterations << '\n';
  }
}

void write_rate_json(std::ostream& out, const std::vector<RateRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(r.mode);
    j["family"] = to_string(r.family);
    j["n_detectors"] = r.n_detectors;
    j["target_dtf"] = r.target_dtf;
    j["rate"] = json_field(r.rate);
    j["speedup"] = json_field(r.speedup);
    j["iterations"] = r.iterations;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace muxdt
