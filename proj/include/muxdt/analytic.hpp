#pragma once

#include <vector>

#include "muxdt/core.hpp"

namespace muxdt {

/// Effective deadtimes by switch position. values[0] is the physical
/// deadtime of detector 1 (seconds for CW, pulses for pulsed); each later
/// entry is discounted by the expected overlap with the earlier detectors'
/// dead intervals. Pulsed tables are floored at zero once the recursion
/// exhausts the deadtime.
struct EffectiveDeadtimeTable {
  std::vector<double> values;
};

/// Mean counts per detector over a 1 s measurement window.
struct CountBreakdown {
  std::vector<double> mean_counts;
  double total = 0.0;
};

struct MultiplexedDtf {
  double dtf = 0.0;
  CountBreakdown breakdown;
};

/// Split of consecutive detection geometries. Case (a): detector 1
/// refires only after detector 2's dead window has lapsed. Case (b): the
/// two dead windows overlap and both contribute. The conditional means
/// are E[blocked gap | a] and E[refire gap | b] (seconds for CW, pulses
/// for pulsed); a conditional mean is 0 when its case has zero
/// probability.
struct CaseSplit {
  double p_a = 0.0;
  double p_b = 0.0;
  double mean_blocked_gap_a = 0.0;
  double mean_refire_gap_b = 0.0;
};

// --- CW (Poissonian source) ---

/// DTF of one detector: lambda*t_d / (1 + lambda*t_d).
double cw_single_dtf(double rate_lambda, double deadtime);

/// Case probabilities and conditional gap means for the CW overlap
/// geometry, in closed form.
CaseSplit cw_case_probabilities(double rate_lambda, double deadtime);

/// Effective-deadtime recursion:
///   T(1) = t_d,  T(i) = T(i-1) - (1 - exp(-lambda*T(i-1))) / (2*lambda).
EffectiveDeadtimeTable cw_effective_deadtimes(double rate_lambda, double deadtime,
                                              int n_detectors);

/// System DTF of the switched pool plus the per-detector count breakdown
/// over a 1 s window.
MultiplexedDtf cw_multiplexed_dtf(double rate_lambda, double deadtime, int n_detectors);

/// Passive 1-to-N splitter: each detector sees rate lambda/N.
double cw_tree_dtf(double rate_lambda, double deadtime, int n_detectors);

/// Single detector with deadtime t_d/N. Same closed form as the tree.
double cw_reduced_dtf(double rate_lambda, double deadtime, int reduction_factor);

// --- Pulsed source ---

/// DTF of one detector: p*n_dead / (1 + p*n_dead).
double pulsed_single_dtf(double p_event, DeadPulseCount n_d);

/// Pulsed case split by direct summation over the interarrival pmfs
/// (geometric tails taken in closed form). Requires n_dead >= 1.
CaseSplit pulsed_case_probabilities(double p_event, DeadPulseCount n_d);

/// Pulsed recursion, kept in real numbers between steps:
///   N(1) = n_dead,
///   N(i) = N(i-1) - (1 - (1-p)^(N(i-1)+1)) / ((2-p) p),
/// floored at zero; detectors past the floor add no deadtime.
EffectiveDeadtimeTable pulsed_effective_deadtimes(double p_event, DeadPulseCount n_d,
                                                  int n_detectors);

MultiplexedDtf pulsed_multiplexed_dtf(double p_event, DeadPulseCount n_d,
                                      int n_detectors);

/// Splitter fan-out: per-detector event probability p/N.
double pulsed_tree_dtf(double p_event, DeadPulseCount n_d, int n_detectors);

/// Single detector with deadtime t_d/N at repetition rate nu; exactly 0
/// once the reduced deadtime drops below the pulse period.
double pulsed_reduced_dtf(double p_event, double rep_rate_nu, double deadtime,
                          int reduction_factor);

}  // namespace muxdt
