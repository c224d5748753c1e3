#pragma once

#include <cstdint>
#include <vector>

namespace muxdt {

/// Routing policy of the 1-by-N switch. The only policy modeled is
/// sequential priority: every photon goes to the lowest-index live
/// detector.
enum class SwitchPolicy { SequentialPriority };

enum class Mode { Cw, Pulsed };

/// System geometry under study. Single is one detector; Multiplexed is
/// the switched pool; Tree is a passive 1-to-N splitter (rate/N per
/// detector); Reduced is a single detector whose deadtime is divided by N.
enum class Family { Single, Multiplexed, Tree, Reduced };

/// CW Poissonian source. rate_lambda is the mean photon rate in
/// photons/second. Detection efficiency is folded into the rate: pass
/// eta*lambda if your collection is lossy.
struct CwSource {
  double rate_lambda = 0.0;

  explicit CwSource(double rate);
};

/// Pulsed source: repetition rate in Hz and the probability that a live
/// detector registers an event on a given pulse.
struct PulsedSource {
  double rep_rate_nu = 0.0;
  double p_event = 0.0;

  PulsedSource(double nu, double p);
};

/// Ordered bank of detectors behind the switch, deadtimes in seconds.
/// Analytic formulas require a homogeneous pool; the simulator accepts
/// per-detector deadtimes.
class DetectorPool {
 public:
  explicit DetectorPool(std::vector<double> deadtimes,
                        SwitchPolicy policy = SwitchPolicy::SequentialPriority);

  static DetectorPool homogeneous(int n_detectors, double deadtime);

  const std::vector<double>& deadtimes() const { return deadtimes_; }
  SwitchPolicy policy() const { return policy_; }
  int size() const { return static_cast<int>(deadtimes_.size()); }

  bool is_homogeneous() const;
  /// Common deadtime of a homogeneous pool; throws for mixed pools.
  double homogeneous_deadtime() const;

 private:
  std::vector<double> deadtimes_;
  SwitchPolicy policy_;
};

/// Whole number of pulses a detector stays dead after firing.
struct DeadPulseCount {
  std::int64_t n_dead = 0;
};

/// Int(nu * t_d). Products within 1e-9 relative of an integer snap to it
/// before flooring so representation error cannot drop a full pulse.
DeadPulseCount dead_pulse_count(double rep_rate_nu, double deadtime_s);

/// Monte Carlo deadtime-fraction estimate. dtf = missed/total; std_err
/// comes from batch scatter. total_events == 0 marks an empty run.
struct DtfEstimate {
  double dtf = 0.0;
  double std_err = 0.0;
  std::int64_t total_events = 0;
  std::int64_t missed_events = 0;
  std::vector<std::int64_t> per_detector_counts;
};

/// Deterministic random stream (xoshiro256** core, SplitMix64 seeding).
///
/// A stream is addressed by (seed, stream_id). The state is derived
/// directly from the pair, so substreams can be created in any order and
/// remain statistically independent; no sequential jump-ahead is needed.
/// The 64-bit integer sequence is platform independent. Floating-point
/// outputs are deterministic for a given libm build.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();
  /// Uniform double strictly inside (0, 1).
  double next_double();
  /// Exponential variate with the given rate; strictly positive.
  double next_exponential(double rate);
  bool next_bernoulli(double p);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream for task `index`. Derivation is a hash of
  /// (stream_id, index), so children of distinct parents never need
  /// coordination.
  RandomStream substream(std::uint64_t index) const;

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

}  // namespace muxdt
