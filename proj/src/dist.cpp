#include "muxdt/dist.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace muxdt {

namespace {

void check_probability(double p, const char* who) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw std::invalid_argument(std::string(who) + ": probability must be in [0, 1]");
}

}  // namespace

double binomial_pmf(std::int64_t n, std::int64_t trials, double p) {
  if (trials < 0 || n < 0)
    throw std::invalid_argument("binomial_pmf: counts must be non-negative");
  if (n > trials)
    throw std::invalid_argument("binomial_pmf: n exceeds trial count");
  check_probability(p, "binomial_pmf");

  if (p == 0.0) return n == 0 ? 1.0 : 0.0;
  if (p == 1.0) return n == trials ? 1.0 : 0.0;

  if (trials <= 64) {
    // C(trials, n) by running product; every intermediate is itself a
    // binomial coefficient, so the divisions are exact in double here.
    double coeff = 1.0;
    for (std::int64_t i = 1; i <= n; ++i)
      coeff = coeff * static_cast<double>(trials - n + i) / static_cast<double>(i);
    return coeff * std::pow(p, static_cast<double>(n)) *
           std::pow(1.0 - p, static_cast<double>(trials - n));
  }

  const double log_pmf = std::lgamma(static_cast<double>(trials) + 1.0) -
                         std::lgamma(static_cast<double>(n) + 1.0) -
                         std::lgamma(static_cast<double>(trials - n) + 1.0) +
                         static_cast<double>(n) * std::log(p) +
                         static_cast<double>(trials - n) * std::log1p(-p);
  return std::exp(log_pmf);
}

double geometric_wait_pmf(std::int64_t n, double p) {
  if (n < 1) throw std::invalid_argument("geometric_wait_pmf: n must be >= 1");
  check_probability(p, "geometric_wait_pmf");
  if (p == 0.0)
    throw std::invalid_argument("geometric_wait_pmf: p must be > 0");
  // p = 1 gives 1 for n = 1 and 0 otherwise via pow(0, n-1).
  return p * std::pow(1.0 - p, static_cast<double>(n - 1));
}

double generalized_geometric_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 1) throw std::invalid_argument("generalized_geometric_pmf: k must be >= 1");
  if (n < k) throw std::invalid_argument("generalized_geometric_pmf: n must be >= k");
  check_probability(p, "generalized_geometric_pmf");
  if (p == 0.0)
    throw std::invalid_argument("generalized_geometric_pmf: p must be > 0");
  return p * binomial_pmf(k - 1, n - 1, p);
}

double geometric_binomial_identity_residual(std::int64_t k, std::int64_t n_pulses,
                                            double p) {
  if (k < 1 || k > n_pulses)
    throw std::invalid_argument(
        "geometric_binomial_identity_residual: need 1 <= k <= n_pulses");
  check_probability(p, "geometric_binomial_identity_residual");
  if (p == 0.0)
    throw std::invalid_argument("geometric_binomial_identity_residual: p must be > 0");

  double lhs = 0.0;
  for (std::int64_t n = k; n <= n_pulses; ++n)
    lhs += generalized_geometric_pmf(n, k, p);
  for (std::int64_t n = k + 1; n <= n_pulses; ++n)
    lhs -= generalized_geometric_pmf(n, k + 1, p);
  return lhs - binomial_pmf(k, n_pulses, p);
}

double CwInterarrivalDensities::refire_gap_density(double gap) const {
  if (!(gap > deadtime)) return 0.0;
  return rate_lambda * std::exp(-rate_lambda * (gap - deadtime));
}

double CwInterarrivalDensities::blocked_gap_density(double gap) const {
  if (!(gap > 0.0) || !(gap < deadtime)) return 0.0;
  const double norm = -std::expm1(-rate_lambda * deadtime);
  return rate_lambda * std::exp(-rate_lambda * gap) / norm;
}

CwInterarrivalDensities cw_interarrival_densities(double rate_lambda, double deadtime) {
  if (!std::isfinite(rate_lambda) || rate_lambda <= 0.0)
    throw std::invalid_argument("cw_interarrival_densities: rate must be > 0");
  if (!std::isfinite(deadtime) || deadtime <= 0.0)
    throw std::invalid_argument("cw_interarrival_densities: deadtime must be > 0");
  return CwInterarrivalDensities{rate_lambda, deadtime};
}

double PulsedInterarrivalPmfs::refire_gap_pmf(std::int64_t n) const {
  if (n < n_dead + 1) return 0.0;
  return p_event * std::pow(1.0 - p_event, static_cast<double>(n - n_dead - 1));
}

double PulsedInterarrivalPmfs::blocked_gap_pmf(std::int64_t n) const {
  if (n < 1 || n > n_dead) return 0.0;
  double norm = 1.0;
  if (p_event < 1.0)
    norm = -std::expm1(static_cast<double>(n_dead) * std::log1p(-p_event));
  return p_event * std::pow(1.0 - p_event, static_cast<double>(n - 1)) / norm;
}

PulsedInterarrivalPmfs pulsed_interarrival_pmfs(double p_event, DeadPulseCount n_d) {
  check_probability(p_event, "pulsed_interarrival_pmfs");
  if (p_event == 0.0)
    throw std::invalid_argument("pulsed_interarrival_pmfs: p must be > 0");
  if (n_d.n_dead < 1)
    throw std::invalid_argument(
        "pulsed_interarrival_pmfs: undefined for zero dead pulses");
  return PulsedInterarrivalPmfs{p_event, n_d.n_dead};
}

DistCheckReport run_dist_check(bool inject_fault) {
  DistCheckReport report;
  char buf[160];

  auto record = [&](double residual, double tol, const char* what, std::int64_t k,
                    std::int64_t n, double p) {
    report.cases_run += 1;
    const double r = std::abs(residual);
    if (r > report.max_abs_residual) report.max_abs_residual = r;
    if (r > tol) {
      report.passed = false;
      std::snprintf(buf, sizeof buf, "%s: k=%lld N=%lld p=%.3f residual=%.3e", what,
                    static_cast<long long>(k), static_cast<long long>(n), p, residual);
      report.failures.emplace_back(buf);
    }
  };

  // Identity grid: 1 <= k <= N <= 10, p in {0.1, ..., 0.9} plus the p = 1 edge.
  for (std::int64_t n = 1; n <= 10; ++n) {
    for (std::int64_t k = 1; k <= n; ++k) {
      for (int ip = 1; ip <= 10; ++ip) {
        const double p = ip == 10 ? 1.0 : 0.1 * ip;
        double residual = geometric_binomial_identity_residual(k, n, p);
        if (inject_fault && n == 10 && k == 5 && ip == 5) residual += 1e-9;
        record(residual, 1e-12, "identity", k, n, p);
      }
    }
  }

  // Blocked-gap pmf normalization (finite sum) and refire-gap pmf
  // normalization (geometric tail, closed form equals 1 by construction,
  // so sum the first terms and add the analytic remainder).
  for (std::int64_t nd = 1; nd <= 8; nd += 1) {
    for (int ip = 1; ip <= 10; ++ip) {
      const double p = ip == 10 ? 1.0 : 0.1 * ip;
      const auto pmfs = pulsed_interarrival_pmfs(p, DeadPulseCount{nd});
      double blocked_sum = 0.0;
      for (std::int64_t n = 1; n <= nd; ++n) blocked_sum += pmfs.blocked_gap_pmf(n);
      record(blocked_sum - 1.0, 1e-12, "blocked-gap norm", 0, nd, p);

      double refire_sum = 0.0;
      const std::int64_t cutoff = nd + 2000;
      for (std::int64_t n = nd + 1; n <= cutoff; ++n)
        refire_sum += pmfs.refire_gap_pmf(n);
      if (p < 1.0)  // analytic tail beyond the cutoff
        refire_sum += std::pow(1.0 - p, static_cast<double>(cutoff - nd));
      record(refire_sum - 1.0, 1e-12, "refire-gap norm", 0, nd, p);
    }
  }

  return report;
}

}  // namespace muxdt
