#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "muxdt/core.hpp"

namespace muxdt {

/// Photon arrival times, strictly increasing, within [0, window].
struct CwEventStream {
  std::vector<double> arrival_times;
  double window = 0.0;
};

/// Indices of pulses that carry an event, strictly increasing, within
/// [0, n_pulses).
struct PulsedEventStream {
  std::vector<std::int64_t> event_pulse_indices;
  std::int64_t n_pulses = 0;
};

/// Cumulative sums of i.i.d. exponential(lambda) gaps; window is the last
/// arrival. Deterministic for a given stream.
CwEventStream gen_cw_stream(double rate_lambda, std::int64_t n_photons,
                            RandomStream& rng);

/// Each pulse carries an event independently with probability p.
PulsedEventStream gen_pulsed_stream(double p_event, std::int64_t n_pulses,
                                    RandomStream& rng);

/// Resumable cascade state: per-detector first instant (or pulse) at which
/// the detector is live again. Fresh state = all live.
struct CwCascadeState {
  std::vector<double> next_free_time;
};
struct PulsedCascadeState {
  std::vector<std::int64_t> next_live_pulse;
};

/// Online cascade: every photon goes to the lowest-index live detector; a
/// detector that fires is dead for its own deadtime (non-extending).
/// Passing a state carries detector recovery across stream chunks, so
/// streaming a split input equals one batch run.
DtfEstimate cascade_cw(const CwEventStream& stream, const DetectorPool& pool,
                       CwCascadeState* state = nullptr);

/// Multi-pass form: filter the full list through detector 1, hand the
/// skipped photons to detector 2, and so on. Behaviorally identical to
/// cascade_cw; kept as the cross-checkable reference path.
DtfEstimate cascade_cw_multipass(const CwEventStream& stream, const DetectorPool& pool);

/// Detector index that caught each photon, -1 for missed. Same routing as
/// cascade_cw.
std::vector<int> cascade_cw_assign(const CwEventStream& stream, const DetectorPool& pool);

/// Pulsed cascade. A detector firing at pulse i is dead for pulses
/// i+1 .. i+n_dead and live again at i+n_dead+1, with n_dead =
/// Int(nu * deadtime) per detector.
DtfEstimate cascade_pulsed(const PulsedEventStream& stream, const DetectorPool& pool,
                           double rep_rate_nu, PulsedCascadeState* state = nullptr);

DtfEstimate cascade_pulsed_multipass(const PulsedEventStream& stream,
                                     const DetectorPool& pool, double rep_rate_nu);

std::vector<int> cascade_pulsed_assign(const PulsedEventStream& stream,
                                       const DetectorPool& pool, double rep_rate_nu);

/// How events reach the pool: the switched cascade, or a passive splitter
/// that routes each event to a uniformly random detector.
enum class Routing { FirstLive, UniformRandom };

using SourceModel = std::variant<CwSource, PulsedSource>;

/// One Monte Carlo run. n_events counts generated photons (CW) or pulses
/// (pulsed) per run; the run is split into `batches` independent sub-runs
/// for the error bar.
struct SimConfig {
  SourceModel source;
  DetectorPool pool;
  Routing routing = Routing::FirstLive;
  std::int64_t n_events = 1000000;
  int batches = 10;
};

/// Pooled DTF over all batches; std_err is the batch-DTF standard
/// deviation over sqrt(batches). Identical (seed, stream_id) gives an
/// identical estimate.
DtfEstimate estimate_dtf(const SimConfig& config, const RandomStream& rng);

}  // namespace muxdt
