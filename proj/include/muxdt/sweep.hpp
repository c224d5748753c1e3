#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include "muxdt/core.hpp"

namespace muxdt {

enum class Engine { Analytic, MonteCarlo, Both };

std::string to_string(Mode mode);
std::string to_string(Family family);
std::string to_string(Engine engine);

/// Sweep axis: photon rate (CW) or event probability (pulsed).
struct GridSpec {
  bool log_scale = true;
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
};

/// Inclusive endpoints; >= 2 points; log grids need positive endpoints.
std::vector<double> make_grid(const GridSpec& grid);

/// Parse "log:1e5:1e9:61" or "lin:0:1:51"; throws invalid_argument.
GridSpec parse_grid(const std::string& text);

struct McParams {
  std::int64_t n_events = 1000000;  // photons (CW) or pulses (pulsed) per point
  int batches = 10;
  std::uint64_t seed = 0;
};

struct SweepSpec {
  Mode mode = Mode::Cw;
  Engine engine = Engine::Analytic;
  Family family = Family::Multiplexed;
  GridSpec grid;
  DetectorPool pool = DetectorPool::homogeneous(1, 50e-9);
  double rep_rate_nu = 0.0;  // pulsed only
  McParams mc;
  int workers = 0;  // 0 = hardware concurrency
};

/// One CSV row of a DTF curve. Analytic rows carry std_err = 0 and
/// n_events = 0. deadtime_s is the homogeneous pool deadtime (NaN for a
/// mixed pool; the pool definition then lives in the invocation).
struct CurveRow {
  Mode mode = Mode::Cw;
  Family family = Family::Multiplexed;
  int n_detectors = 1;
  double deadtime_s = 0.0;
  double rate_or_p = 0.0;
  double nu_hz = 0.0;
  Engine engine = Engine::Analytic;
  double dtf = 0.0;
  double std_err = 0.0;
  std::int64_t n_events = 0;
  std::uint64_t seed = 0;
};

/// Evaluate the sweep. Grid points are dispatched to a worker pool; each
/// Monte Carlo point draws substream(point index) of `base`, so output is
/// identical for any worker count. Rows come back in grid order, analytic
/// before Monte Carlo at each point when engine = Both.
std::vector<CurveRow> run_dtf_curve(const SweepSpec& spec, const RandomStream& base);
std::vector<CurveRow> run_dtf_curve(const SweepSpec& spec);

/// One row of a rate solve. For pulsed mode `rate` is the incident event
/// rate p*nu. Unreachable targets are reported as NaN.
struct RateRow {
  Mode mode = Mode::Cw;
  Family family = Family::Multiplexed;
  int n_detectors = 1;
  double target_dtf = 0.0;
  double rate = 0.0;
  double speedup = 0.0;
  int iterations = 0;
};

inline constexpr const char* kCurveHeader =
    "mode,family,n_detectors,deadtime_s,rate_or_p,nu_hz,engine,dtf,std_err,n_events,seed";
inline constexpr const char* kRateHeader =
    "mode,family,n_detectors,target_dtf,rate,speedup,iterations";

/// Scientific notation, 17 significant digits: round-trips exactly.
std::string csv_num(double v);

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);
void write_curve_json(std::ostream& out, const std::vector<CurveRow>& rows);
void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows);
void write_rate_json(std::ostream& out, const std::vector<RateRow>& rows);

/// Run fn(0..n_tasks-1) on up to n_workers threads (0 = hardware). Task
/// order within a worker is unspecified; exceptions propagate.
template <class Fn>
void parallel_for(int n_tasks, int n_workers, Fn&& fn) {
  if (n_workers <= 0)
    n_workers = static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  const int n_threads = std::min(n_workers, n_tasks);
  if (n_threads <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    threads.emplace_back([&, t] {
      try {
        int i;
        while ((i = next.fetch_add(1)) < n_tasks) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
        next.store(n_tasks);  // drain remaining work
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace muxdt
