#include "muxdt/simulate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace muxdt {

namespace {

// Shared cascade loop. Sink receives (event index, detector index or -1).
template <class Time, class Sink>
void cascade_scan(const std::vector<Time>& events, std::vector<Time>& next_free,
                  const std::vector<Time>& dead_spans, Sink&& sink) {
  const int n = static_cast<int>(next_free.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Time t = events[i];
    int caught = -1;
    for (int d = 0; d < n; ++d) {
      if (next_free[d] <= t) {
        next_free[d] = t + dead_spans[d];
        caught = d;
        break;
      }
    }
    sink(i, caught);
  }
}

DtfEstimate estimate_from_counts(std::int64_t total, std::int64_t missed,
                                 std::vector<std::int64_t> per_detector) {
  DtfEstimate est;
  est.total_events = total;
  est.missed_events = missed;
  est.per_detector_counts = std::move(per_detector);
  est.dtf = total > 0 ? static_cast<double>(missed) / static_cast<double>(total) : 0.0;
  return est;
}

std::vector<std::int64_t> pulse_spans(const DetectorPool& pool, double rep_rate_nu) {
  std::vector<std::int64_t> spans;
  spans.reserve(pool.deadtimes().size());
  for (double t_d : pool.deadtimes())
    spans.push_back(dead_pulse_count(rep_rate_nu, t_d).n_dead + 1);
  return spans;
}

}  // namespace

CwEventStream gen_cw_stream(double rate_lambda, std::int64_t n_photons,
                            RandomStream& rng) {
  if (!std::isfinite(rate_lambda) || rate_lambda <= 0.0)
    throw std::invalid_argument("gen_cw_stream: rate must be > 0");
  if (n_photons < 1)
    throw std::invalid_argument("gen_cw_stream: need at least one photon");

  CwEventStream stream;
  stream.arrival_times.resize(static_cast<std::size_t>(n_photons));
  double t = 0.0;
  for (auto& arrival : stream.arrival_times) {
    double next = t + rng.next_exponential(rate_lambda);
    if (next <= t)  // gap lost to rounding at large t
      next = std::nextafter(t, std::numeric_limits<double>::infinity());
    arrival = t = next;
  }
  stream.window = t;
  return stream;
}

PulsedEventStream gen_pulsed_stream(double p_event, std::int64_t n_pulses,
                                    RandomStream& rng) {
  if (!std::isfinite(p_event) || p_event < 0.0 || p_event > 1.0)
    throw std::invalid_argument("gen_pulsed_stream: p must be in [0, 1]");
  if (n_pulses < 1)
    throw std::invalid_argument("gen_pulsed_stream: need at least one pulse");

  PulsedEventStream stream;
  stream.n_pulses = n_pulses;
  if (p_event == 0.0) return stream;
  if (p_event == 1.0) {
    stream.event_pulse_indices.resize(static_cast<std::size_t>(n_pulses));
    for (std::int64_t i = 0; i < n_pulses; ++i)
      stream.event_pulse_indices[static_cast<std::size_t>(i)] = i;
    return stream;
  }
  for (std::int64_t i = 0; i < n_pulses; ++i)
    if (rng.next_bernoulli(p_event)) stream.event_pulse_indices.push_back(i);
  return stream;
}

DtfEstimate cascade_cw(const CwEventStream& stream, const DetectorPool& pool,
                       CwCascadeState* state) {
  CwCascadeState local;
  CwCascadeState& s = state ? *state : local;
  if (s.next_free_time.empty())
    s.next_free_time.assign(pool.deadtimes().size(), 0.0);
  if (s.next_free_time.size() != pool.deadtimes().size())
    throw std::invalid_argument("cascade_cw: state does not match pool");

  std::vector<std::int64_t> counts(pool.deadtimes().size(), 0);
  std::int64_t missed = 0;
  cascade_scan(stream.arrival_times, s.next_free_time, pool.deadtimes(),
               [&](std::size_t, int d) {
                 if (d < 0)
                   ++missed;
                 else
                   ++counts[static_cast<std::size_t>(d)];
               });
  return estimate_from_counts(static_cast<std::int64_t>(stream.arrival_times.size()),
                              missed, std::move(counts));
}

DtfEstimate cascade_cw_multipass(const CwEventStream& stream, const DetectorPool& pool) {
  std::vector<double> current = stream.arrival_times;
  std::vector<std::int64_t> counts;
  counts.reserve(pool.deadtimes().size());
  for (double t_d : pool.deadtimes()) {
    std::vector<double> skipped;
    std::int64_t detected = 0;
    double next_free = 0.0;
    for (double t : current) {
      if (t >= next_free) {
        next_free = t + t_d;
        ++detected;
      } else {
        skipped.push_back(t);
      }
    }
    counts.push_back(detected);
    current = std::move(skipped);
  }
  return estimate_from_counts(static_cast<std::int64_t>(stream.arrival_times.size()),
                              static_cast<std::int64_t>(current.size()),
                              std::move(counts));
}

std::vector<int> cascade_cw_assign(const CwEventStream& stream,
                                   const DetectorPool& pool) {
  std::vector<double> next_free(pool.deadtimes().size(), 0.0);
  std::vector<int> assignment(stream.arrival_times.size(), -1);
  cascade_scan(stream.arrival_times, next_free, pool.deadtimes(),
               [&](std::size_t i, int d) { assignment[i] = d; });
  return assignment;
}

DtfEstimate cascade_pulsed(const PulsedEventStream& stream, const DetectorPool& pool,
                           double rep_rate_nu, PulsedCascadeState* state) {
  PulsedCascadeState local;
  PulsedCascadeState& s = state ? *state : local;
  if (s.next_live_pulse.empty())
    s.next_live_pulse.assign(pool.deadtimes().size(), 0);
  if (s.next_live_pulse.size() != pool.deadtimes().size())
    throw std::invalid_argument("cascade_pulsed: state does not match pool");

  const auto spans = pulse_spans(pool, rep_rate_nu);
  std::vector<std::int64_t> counts(pool.deadtimes().size(), 0);
  std::int64_t missed = 0;
  cascade_scan(stream.event_pulse_indices, s.next_live_pulse, spans,
               [&](std::size_t, int d) {
                 if (d < 0)
                   ++missed;
                 else
                   ++counts[static_cast<std::size_t>(d)];
               });
  return estimate_from_counts(
      static_cast<std::int64_t>(stream.event_pulse_indices.size()), missed,
      std::move(counts));
}

DtfEstimate cascade_pulsed_multipass(const PulsedEventStream& stream,
                                     const DetectorPool& pool, double rep_rate_nu) {
  const auto spans = pulse_spans(pool, rep_rate_nu);
  std::vector<std::int64_t> current = stream.event_pulse_indices;
  std::vector<std::int64_t> counts;
  counts.reserve(pool.deadtimes().size());
  for (std::int64_t span : spans) {
    std::vector<std::int64_t> skipped;
    std::int64_t detected = 0;
    std::int64_t next_live = 0;
    for (std::int64_t pulse : current) {
      if (pulse >= next_live) {
        next_live = pulse + span;
        ++detected;
      } else {
        skipped.push_back(pulse);
      }
    }
    counts.push_back(detected);
    current = std::move(skipped);
  }
  return estimate_from_counts(
      static_cast<std::int64_t>(stream.event_pulse_indices.size()),
      static_cast<std::int64_t>(current.size()), std::move(counts));
}

std::vector<int> cascade_pulsed_assign(const PulsedEventStream& stream,
                                       const DetectorPool& pool, double rep_rate_nu) {
  const auto spans = pulse_spans(pool, rep_rate_nu);
  std::vector<std::int64_t> next_live(pool.deadtimes().size(), 0);
  std::vector<int> assignment(stream.event_pulse_indices.size(), -1);
  cascade_scan(stream.event_pulse_indices, next_live, spans,
               [&](std::size_t i, int d) { assignment[i] = d; });
  return assignment;
}

namespace {

// One batch of the Monte Carlo run; routing decides between the switched
// cascade and uniform splitter fan-out.
DtfEstimate run_batch(const SimConfig& config, std::int64_t n_events,
                      RandomStream rng) {
  const int n_det = config.pool.size();
  if (const auto* cw = std::get_if<CwSource>(&config.source)) {
    if (cw->rate_lambda == 0.0) return DtfEstimate{0, 0, 0, 0, {}};
    const auto stream = gen_cw_stream(cw->rate_lambda, n_events, rng);
    if (config.routing == Routing::FirstLive) return cascade_cw(stream, config.pool);

    // Splitter: independent per-detector deadtime filters.
    std::vector<double> next_free(static_cast<std::size_t>(n_det), 0.0);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_det), 0);
    std::int64_t missed = 0;
    for (double t : stream.arrival_times) {
      const int d = static_cast<int>(rng.next_double() * n_det);
      if (next_free[static_cast<std::size_t>(d)] <= t) {
        next_free[static_cast<std::size_t>(d)] = t + config.pool.deadtimes()[static_cast<std::size_t>(d)];
        ++counts[static_cast<std::size_t>(d)];
      } else {
        ++missed;
      }
    }
    return estimate_from_counts(static_cast<std::int64_t>(stream.arrival_times.size()),
                                missed, std::move(counts));
  }

  const auto& pulsed = std::get<PulsedSource>(config.source);
  const auto stream = gen_pulsed_stream(pulsed.p_event, n_events, rng);
  if (config.routing == Routing::FirstLive)
    return cascade_pulsed(stream, config.pool, pulsed.rep_rate_nu);

  const auto spans = pulse_spans(config.pool, pulsed.rep_rate_nu);
  std::vector<std::int64_t> next_live(static_cast<std::size_t>(n_det), 0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_det), 0);
  std::int64_t missed = 0;
  for (std::int64_t pulse : stream.event_pulse_indices) {
    const int d = static_cast<int>(rng.next_double() * n_det);
    if (next_live[static_cast<std::size_t>(d)] <= pulse) {
      next_live[static_cast<std::size_t>(d)] = pulse + spans[static_cast<std::size_t>(d)];
      ++counts[static_cast<std::size_t>(d)];
    } else {
      ++missed;
    }
  }
  return estimate_from_counts(
      static_cast<std::int64_t>(stream.event_pulse_indices.size()), missed,
      std::move(counts));
}

}  // namespace

DtfEstimate estimate_dtf(const SimConfig& config, const RandomStream& rng) {
  if (config.batches < 2)
    throw std::invalid_argument("estimate_dtf: need at least 2 batches");
  if (config.n_events < config.batches)
    throw std::invalid_argument("estimate_dtf: need n_events >= batches");

  const std::int64_t base = config.n_events / config.batches;
  const std::int64_t remainder = config.n_events % config.batches;

  DtfEstimate pooled;
  pooled.per_detector_counts.assign(config.pool.deadtimes().size(), 0);
  std::vector<double> batch_dtfs;
  batch_dtfs.reserve(static_cast<std::size_t>(config.batches));

  for (int b = 0; b < config.batches; ++b) {
    const std::int64_t n = base + (b < remainder ? 1 : 0);
    const DtfEstimate est = run_batch(config, n, rng.substream(static_cast<std::uint64_t>(b)));
    pooled.total_events += est.total_events;
    pooled.missed_events += est.missed_events;
    for (std::size_t d = 0; d < est.per_detector_counts.size(); ++d)
      pooled.per_detector_counts[d] += est.per_detector_counts[d];
    batch_dtfs.push_back(est.dtf);
  }

  pooled.dtf = pooled.total_events > 0
                   ? static_cast<double>(pooled.missed_events) /
                         static_cast<double>(pooled.total_events)
                   : 0.0;

  double mean = 0.0;
  for (double d : batch_dtfs) mean += d;
  mean /= static_cast<double>(batch_dtfs.size());
  double ss = 0.0;
  for (double d : batch_dtfs) ss += (d - mean) * (d - mean);
  const double var = ss / static_cast<double>(batch_dtfs.size() - 1);
  pooled.std_err = std::sqrt(var / static_cast<double>(batch_dtfs.size()));
  return pooled;
}

}  // namespace muxdt
