#include "muxdt/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "muxdt/dist.hpp"

namespace muxdt {

namespace {

void check_cw_args(double rate_lambda, double deadtime, const char* who,
                   bool allow_zero_rate) {
  if (!std::isfinite(rate_lambda) || rate_lambda < 0.0 ||
      (!allow_zero_rate && rate_lambda == 0.0))
    throw std::invalid_argument(std::string(who) + ": bad photon rate");
  if (!std::isfinite(deadtime) || deadtime <= 0.0)
    throw std::invalid_argument(std::string(who) + ": deadtime must be > 0");
}

void check_p(double p, const char* who, bool allow_zero) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0 || (!allow_zero && p == 0.0))
    throw std::invalid_argument(std::string(who) + ": bad event probability");
}

void check_n(int n, const char* who) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": detector count must be >= 1");
}

// 1 - (1 + 2x) exp(-2x), which is ~2x^2 for small x; series below the
// cancellation threshold.
double one_minus_poly_exp2(double x) {
  if (x < 1e-3) {
    const double x2 = x * x;
    return 2.0 * x2 - (8.0 / 3.0) * x2 * x + 2.0 * x2 * x2 -
           (16.0 / 15.0) * x2 * x2 * x;
  }
  return 1.0 - (1.0 + 2.0 * x) * std::exp(-2.0 * x);
}

// Decrement of the pulsed recursion: (1 - (1-p)^(v+1)) / ((2-p) p).
double pulsed_overlap_decrement(double p, double v) {
  double numer;
  if (p == 1.0)
    numer = 1.0;
  else
    numer = -std::expm1((v + 1.0) * std::log1p(-p));
  return numer / ((2.0 - p) * p);
}

// DTF of the pool as the product of per-stage blocking fractions
// x_i/(1+x_i), x_i = load * effective deadtime of stage i. Equals the
// fraction of the window during which every detector is dead.
double blocked_fraction_product(double load, const std::vector<double>& table) {
  double dtf = 1.0;
  for (double t : table) {
    const double x = load * t;
    dtf *= x / (1.0 + x);
  }
  return dtf;
}

CountBreakdown breakdown_from_table(double load, const std::vector<double>& table) {
  // M_1 = load*T / (1 + load*table[0]) with window T = 1; each later
  // detector is live only while all earlier ones are dead.
  CountBreakdown out;
  out.mean_counts.resize(table.size());
  double live_window = 1.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double m = load * live_window / (1.0 + load * table[i]);
    out.mean_counts[i] = m;
    out.total += m;
    live_window = m * table[i];
  }
  return out;
}

}  // namespace

double cw_single_dtf(double rate_lambda, double deadtime) {
  check_cw_args(rate_lambda, deadtime, "cw_single_dtf", /*allow_zero_rate=*/true);
  const double x = rate_lambda * deadtime;
  return x / (1.0 + x);
}

CaseSplit cw_case_probabilities(double rate_lambda, double deadtime) {
  check_cw_args(rate_lambda, deadtime, "cw_case_probabilities", false);
  const double x = rate_lambda * deadtime;
  const double em = std::exp(-x);
  const double a = -std::expm1(-x);            // 1 - e^-x
  const double b = -std::expm1(-2.0 * x) / 2.0;  // (1 - e^-2x)/2
  const double g = one_minus_poly_exp2(x);       // 1 - (1+2x) e^-2x

  CaseSplit split;
  split.p_a = 0.5 * (1.0 + em);
  split.p_b = 0.5 * a;

  // E[blocked gap | a] = g / (2 lambda (1 - e^-2x)).
  split.mean_blocked_gap_a = g / (4.0 * rate_lambda * a) / split.p_a;

  // E[refire gap | b]: integrate the refire density over the overlap
  // region; both nested integrals reduce to exponentials.
  const double numer = (deadtime * (a - b) + (a - b - 0.25 * g) / rate_lambda) / a;
  split.mean_refire_gap_b = split.p_b > 0.0 ? numer / split.p_b : 0.0;
  return split;
}

EffectiveDeadtimeTable cw_effective_deadtimes(double rate_lambda, double deadtime,
                                              int n_detectors) {
  check_cw_args(rate_lambda, deadtime, "cw_effective_deadtimes", false);
  check_n(n_detectors, "cw_effective_deadtimes");
  EffectiveDeadtimeTable table;
  table.values.resize(static_cast<std::size_t>(n_detectors));
  double v = deadtime;
  table.values[0] = v;
  for (int i = 1; i < n_detectors; ++i) {
    v -= -std::expm1(-rate_lambda * v) / (2.0 * rate_lambda);
    table.values[static_cast<std::size_t>(i)] = v;
  }
  return table;
}

MultiplexedDtf cw_multiplexed_dtf(double rate_lambda, double deadtime, int n_detectors) {
  check_cw_args(rate_lambda, deadtime, "cw_multiplexed_dtf", true);
  check_n(n_detectors, "cw_multiplexed_dtf");
  MultiplexedDtf out;
  out.breakdown.mean_counts.assign(static_cast<std::size_t>(n_detectors), 0.0);
  if (rate_lambda == 0.0) return out;

  const auto table = cw_effective_deadtimes(rate_lambda, deadtime, n_detectors);
  out.dtf = blocked_fraction_product(rate_lambda, table.values);
  out.breakdown = breakdown_from_table(rate_lambda, table.values);
  return out;
}

double cw_tree_dtf(double rate_lambda, double deadtime, int n_detectors) {
  check_cw_args(rate_lambda, deadtime, "cw_tree_dtf", true);
  check_n(n_detectors, "cw_tree_dtf");
  const double x = rate_lambda * deadtime / n_detectors;
  return x / (1.0 + x);
}

double cw_reduced_dtf(double rate_lambda, double deadtime, int reduction_factor) {
  // Same closed form as the tree: rate/N at full deadtime and full rate at
  // deadtime/N are indistinguishable through lambda*T_d.
  return cw_tree_dtf(rate_lambda, deadtime, reduction_factor);
}

double pulsed_single_dtf(double p_event, DeadPulseCount n_d) {
  check_p(p_event, "pulsed_single_dtf", true);
  if (n_d.n_dead < 0)
    throw std::invalid_argument("pulsed_single_dtf: dead pulse count must be >= 0");
  const double x = p_event * static_cast<double>(n_d.n_dead);
  return x / (1.0 + x);
}

CaseSplit pulsed_case_probabilities(double p_event, DeadPulseCount n_d) {
  check_p(p_event, "pulsed_case_probabilities", false);
  if (n_d.n_dead < 1)
    throw std::invalid_argument(
        "pulsed_case_probabilities: undefined for zero dead pulses");
  const auto pmfs = pulsed_interarrival_pmfs(p_event, n_d);
  const double q = 1.0 - p_event;
  const std::int64_t nd = n_d.n_dead;

  CaseSplit split;
  double pa_mean = 0.0;
  for (std::int64_t d = 1; d <= nd; ++d) {
    // Refire tail sum_{m >= d + nd} P_refire(m) = q^(d-1), in closed form.
    const double w = pmfs.blocked_gap_pmf(d) * std::pow(q, static_cast<double>(d - 1));
    split.p_a += w;
    pa_mean += static_cast<double>(d) * w;
  }
  double pb_mean = 0.0;
  for (std::int64_t d = 2; d <= nd; ++d) {
    for (std::int64_t m = nd + 1; m <= d + nd - 1; ++m) {
      const double w = pmfs.blocked_gap_pmf(d) * pmfs.refire_gap_pmf(m);
      split.p_b += w;
      pb_mean += static_cast<double>(m) * w;
    }
  }
  split.mean_blocked_gap_a = split.p_a > 0.0 ? pa_mean / split.p_a : 0.0;
  split.mean_refire_gap_b = split.p_b > 0.0 ? pb_mean / split.p_b : 0.0;
  return split;
}

EffectiveDeadtimeTable pulsed_effective_deadtimes(double p_event, DeadPulseCount n_d,
                                                  int n_detectors) {
  check_p(p_event, "pulsed_effective_deadtimes", false);
  if (n_d.n_dead < 1)
    throw std::invalid_argument(
        "pulsed_effective_deadtimes: dead pulse count must be >= 1");
  check_n(n_detectors, "pulsed_effective_deadtimes");
  EffectiveDeadtimeTable table;
  table.values.resize(static_cast<std::size_t>(n_detectors));
  double v = static_cast<double>(n_d.n_dead);
  table.values[0] = v;
  for (int i = 1; i < n_detectors; ++i) {
    v = std::max(0.0, v - pulsed_overlap_decrement(p_event, v));
    table.values[static_cast<std::size_t>(i)] = v;
  }
  return table;
}

MultiplexedDtf pulsed_multiplexed_dtf(double p_event, DeadPulseCount n_d,
                                      int n_detectors) {
  check_p(p_event, "pulsed_multiplexed_dtf", true);
  check_n(n_detectors, "pulsed_multiplexed_dtf");
  MultiplexedDtf out;
  out.breakdown.mean_counts.assign(static_cast<std::size_t>(n_detectors), 0.0);
  if (p_event == 0.0 || n_d.n_dead == 0) return out;

  const auto table = pulsed_effective_deadtimes(p_event, n_d, n_detectors);
  out.dtf = std::clamp(blocked_fraction_product(p_event, table.values), 0.0, 1.0);
  out.breakdown = breakdown_from_table(p_event, table.values);
  return out;
}

double pulsed_tree_dtf(double p_event, DeadPulseCount n_d, int n_detectors) {
  check_p(p_event, "pulsed_tree_dtf", true);
  check_n(n_detectors, "pulsed_tree_dtf");
  if (n_d.n_dead < 0)
    throw std::invalid_argument("pulsed_tree_dtf: dead pulse count must be >= 0");
  const double x = p_event * static_cast<double>(n_d.n_dead) / n_detectors;
  return x / (1.0 + x);
}

double pulsed_reduced_dtf(double p_event, double rep_rate_nu, double deadtime,
                          int reduction_factor) {
  check_p(p_event, "pulsed_reduced_dtf", true);
  check_n(reduction_factor, "pulsed_reduced_dtf");
  const auto reduced = dead_pulse_count(rep_rate_nu, deadtime / reduction_factor);
  if (reduced.n_dead == 0) return 0.0;
  return pulsed_single_dtf(p_event, reduced);
}

}  // namespace muxdt
