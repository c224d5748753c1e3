#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "muxdt/core.hpp"

namespace muxdt {

/// B(n | trials, p): probability of n successes in `trials` Bernoulli(p)
/// trials. Exact product form for small trial counts, log-gamma form for
/// large ones.
double binomial_pmf(std::int64_t n, std::int64_t trials, double p);

/// T(n) = p (1-p)^(n-1): probability of waiting n pulses for the first
/// event, n >= 1.
double geometric_wait_pmf(std::int64_t n, double p);

/// T_k(n) = p B(k-1 | n-1, p): probability that the k-th event lands
/// exactly on pulse n, n >= k >= 1. k = 1 reduces to the geometric wait.
double generalized_geometric_pmf(std::int64_t n, std::int64_t k, double p);

/// Residual of the wait-time/count identity
///   sum_{n=k}^{N} T_k(n) - sum_{n=k+1}^{N} T_{k+1}(n) = B(k | N, p),
/// which must vanish for all 1 <= k <= N.
double geometric_binomial_identity_residual(std::int64_t k, std::int64_t n_pulses,
                                            double p);

/// Interarrival densities seen by the second detector of a CW pool.
/// refire_gap_density is the pdf of the gap between two consecutive counts
/// of detector 1 (support gap > deadtime). blocked_gap_density is the pdf
/// of the arrival offset of the photon that detector 2 catches inside
/// detector 1's dead window (support 0 < gap < deadtime).
struct CwInterarrivalDensities {
  double rate_lambda = 0.0;
  double deadtime = 0.0;

  double refire_gap_density(double gap) const;
  double blocked_gap_density(double gap) const;
};

CwInterarrivalDensities cw_interarrival_densities(double rate_lambda, double deadtime);

/// Pulsed counterparts, in whole pulses. refire_gap_pmf has support
/// n >= n_dead + 1; blocked_gap_pmf has support 1 <= n <= n_dead. Requires
/// n_dead >= 1 (with no dead pulses there is no blocked arrival).
struct PulsedInterarrivalPmfs {
  double p_event = 0.0;
  std::int64_t n_dead = 0;

  double refire_gap_pmf(std::int64_t n) const;
  double blocked_gap_pmf(std::int64_t n) const;
};

PulsedInterarrivalPmfs pulsed_interarrival_pmfs(double p_event, DeadPulseCount n_d);

/// Self-check over the distribution layer: the geometric/binomial identity
/// on the full small grid plus pmf normalizations. Used by `muxdt
/// dist-check`; inject_fault flips one residual to exercise the failure
/// path.
struct DistCheckReport {
  bool passed = true;
  int cases_run = 0;
  double max_abs_residual = 0.0;
  std::vector<std::string> failures;  // human-readable, one per offending case
};

DistCheckReport run_dist_check(bool inject_fault = false);

}  // namespace muxdt
