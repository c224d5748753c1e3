#include "muxdt/solve.hpp"

#include <algorithm>
#include <cmath>

#include "muxdt/analytic.hpp"

namespace muxdt {

namespace {

void check_target(double target) {
  if (!std::isfinite(target) || target <= 0.0 || target >= 1.0)
    throw std::invalid_argument("rate_at_dtf: target DTF must be inside (0, 1)");
}

double midpoint(double lo, double hi, bool log_scale) {
  return log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
}

bool converged(double lo, double hi, double rel_tol) {
  return hi - lo <= rel_tol * hi;
}

RateAtDtfResult closed_form(double rate, double target) {
  return RateAtDtfResult{rate, target, rate, rate, 0};
}

}  // namespace

void shrink_bracket(const std::function<double(double)>& dtf_of_rate, double target,
                    double& lo, double& hi) {
  double dtf_lo = dtf_of_rate(lo);
  double dtf_hi = dtf_of_rate(hi);
  if (!(dtf_lo <= target) || !(target <= dtf_hi))
    throw BracketError("target DTF not bracketed", lo, hi, dtf_lo, dtf_hi);
  while (hi > 2.0 * lo) {
    const double probe = hi / 2.0;
    const double d = dtf_of_rate(probe);
    if (d >= target)
      hi = probe;
    else
      break;
  }
  while (lo < hi / 2.0) {
    const double probe = lo * 2.0;
    const double d = dtf_of_rate(probe);
    if (d <= target)
      lo = probe;
    else
      break;
  }
}

RateAtDtfResult bisect_rate(const std::function<double(double)>& dtf_of_rate,
                            double target, double lo, double hi,
                            const BisectOptions& options) {
  check_target(target);
  if (!(lo <= hi)) throw std::invalid_argument("bisect_rate: bad bracket");
  if (options.log_scale && lo <= 0.0)
    throw std::invalid_argument("bisect_rate: log-scale bracket requires lo > 0");

  double dtf_lo = dtf_of_rate(lo);
  double dtf_hi = dtf_of_rate(hi);
  if (!(dtf_lo <= target) || !(target <= dtf_hi))
    throw BracketError("target DTF not bracketed", lo, hi, dtf_lo, dtf_hi);

  RateAtDtfResult result;
  result.target_dtf = target;
  result.bracket_lo = lo;
  result.bracket_hi = hi;

  int it = 0;
  while (!converged(lo, hi, options.rel_tol) && it < options.max_iterations) {
    ++it;
    const double mid = midpoint(lo, hi, options.log_scale);
    const double d = dtf_of_rate(mid);
    if (d < dtf_lo - options.monotone_slack || d > dtf_hi + options.monotone_slack)
      throw ModelError("bisect_rate: non-monotone DTF samples");
    if (d < target) {
      lo = mid;
      dtf_lo = d;
    } else {
      hi = mid;
      dtf_hi = d;
    }
  }
  result.iterations = it;
  result.rate = midpoint(lo, hi, options.log_scale);
  return result;
}

RateAtDtfResult bisect_rate_mc(
    const std::function<DtfEstimate(double rate, std::uint64_t probe)>& estimate_at,
    double target, double lo, double hi, const BisectOptions& options) {
  check_target(target);
  if (options.log_scale && lo <= 0.0)
    throw std::invalid_argument("bisect_rate_mc: log-scale bracket requires lo > 0");

  std::uint64_t probe = 0;
  DtfEstimate est_lo = estimate_at(lo, probe++);
  DtfEstimate est_hi = estimate_at(hi, probe++);
  if (!(est_lo.dtf <= target) || !(target <= est_hi.dtf))
    throw BracketError("target DTF not bracketed", lo, hi, est_lo.dtf, est_hi.dtf);

  RateAtDtfResult result;
  result.target_dtf = target;
  result.bracket_lo = lo;
  result.bracket_hi = hi;

  int it = 0;
  while (!converged(lo, hi, options.rel_tol) && it < options.max_iterations) {
    ++it;
    const double mid = midpoint(lo, hi, options.log_scale);
    const DtfEstimate est = estimate_at(mid, probe++);
    const double slack = 5.0 * (est.std_err + est_lo.std_err + est_hi.std_err) +
                         options.monotone_slack;
    if (est.dtf < est_lo.dtf - slack || est.dtf > est_hi.dtf + slack)
      throw ModelError("bisect_rate_mc: non-monotone DTF samples");

    // Stop once the bracket is below the statistical resolution: the rate
    // step that a one-std_err DTF change can resolve.
    const double dtf_span = std::max(est_hi.dtf - est_lo.dtf, 1e-300);
    const double resolution = est.std_err * (hi - lo) / dtf_span;
    if (est.dtf < target) {
      lo = mid;
      est_lo = est;
    } else {
      hi = mid;
      est_hi = est;
    }
    if (hi - lo <= resolution) break;
  }
  result.iterations = it;
  result.rate = midpoint(lo, hi, options.log_scale);
  return result;
}

RateAtDtfResult cw_rate_at_dtf(Family family, double deadtime, int n_detectors,
                               double target) {
  check_target(target);
  if (!std::isfinite(deadtime) || deadtime <= 0.0)
    throw std::invalid_argument("cw_rate_at_dtf: deadtime must be > 0");
  if (n_detectors < 1)
    throw std::invalid_argument("cw_rate_at_dtf: detector count must be >= 1");

  const double odds = target / (1.0 - target);  // lambda * t_d at the target
  switch (family) {
    case Family::Single:
      return closed_form(odds / deadtime, target);
    case Family::Tree:
    case Family::Reduced:
      return closed_form(static_cast<double>(n_detectors) * (odds / deadtime), target);
    case Family::Multiplexed: {
      auto dtf = [&](double rate) {
        return cw_multiplexed_dtf(rate, deadtime, n_detectors).dtf;
      };
      double lo = 1.0, hi = 1e12;
      shrink_bracket(dtf, target, lo, hi);
      return bisect_rate(dtf, target, lo, hi);
    }
  }
  throw std::invalid_argument("cw_rate_at_dtf: unknown family");
}

RateAtDtfResult pulsed_rate_at_dtf(Family family, double rep_rate_nu, double deadtime,
                                   int n_detectors, double target) {
  check_target(target);
  if (n_detectors < 1)
    throw std::invalid_argument("pulsed_rate_at_dtf: detector count must be >= 1");
  const auto n_d = dead_pulse_count(rep_rate_nu, deadtime);
  const double odds = target / (1.0 - target);  // p * n_dead at the target

  auto closed_p = [&](double effective_dead, const char* what) {
    if (effective_dead <= 0.0)
      throw BracketError(std::string(what) + ": DTF is identically zero", 0.0, 1.0, 0.0,
                         0.0);
    const double p = odds / effective_dead;
    if (p > 1.0) {
      const double max_dtf = effective_dead / (1.0 + effective_dead);
      throw BracketError(std::string(what) + ": target DTF above reachable maximum",
                         0.0, 1.0, 0.0, max_dtf);
    }
    return closed_form(p, target);
  };

  switch (family) {
    case Family::Single:
      return closed_p(static_cast<double>(n_d.n_dead), "pulsed single");
    case Family::Tree:
      return closed_p(static_cast<double>(n_d.n_dead) / n_detectors, "pulsed tree");
    case Family::Reduced: {
      const auto reduced = dead_pulse_count(rep_rate_nu, deadtime / n_detectors);
      return closed_p(static_cast<double>(reduced.n_dead), "pulsed reduced");
    }
    case Family::Multiplexed: {
      auto dtf = [&](double p) {
        return pulsed_multiplexed_dtf(p, n_d, n_detectors).dtf;
      };
      BisectOptions options;
      options.log_scale = false;  // p spans [0, 1]
      return bisect_rate(dtf, target, 0.0, 1.0, options);
    }
  }
  throw std::invalid_argument("pulsed_rate_at_dtf: unknown family");
}

std::vector<SpeedupPoint> speedup_curve(Mode mode, Family family, double deadtime,
                                        double rep_rate_nu, double target, int n_max) {
  if (n_max < 1)
    throw std::invalid_argument("speedup_curve: n_max must be >= 1");
  std::vector<SpeedupPoint> points;
  points.reserve(static_cast<std::size_t>(n_max));
  double rate_1 = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const RateAtDtfResult r =
        mode == Mode::Cw ? cw_rate_at_dtf(family, deadtime, n, target)
                         : pulsed_rate_at_dtf(family, rep_rate_nu, deadtime, n, target);
    if (n == 1) rate_1 = r.rate;
    SpeedupPoint point;
    point.n_detectors = n;
    point.rate = r.rate;
    point.iterations = r.iterations;
    // Closed-form families have exact speedups; do not re-divide the rates.
    if (family == Family::Tree || (mode == Mode::Cw && family == Family::Reduced))
      point.speedup = static_cast<double>(n);
    else if (mode == Mode::Pulsed && family == Family::Reduced)
      point.speedup =
          static_cast<double>(dead_pulse_count(rep_rate_nu, deadtime).n_dead) /
          static_cast<double>(dead_pulse_count(rep_rate_nu, deadtime / n).n_dead);
    else
      point.speedup = r.rate / rate_1;
    points.push_back(point);
  }
  return points;
}

PolyFit2 fit_poly2(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_poly2: need at least 3 points");

  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& [x, y] : points) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  const auto distinct =
      static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());

  const double n = static_cast<double>(points.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= n;
  mean_y /= n;

  PolyFit2 fit;
  double a0 = mean_y, a1 = 0.0, a2 = 0.0;  // coefficients in u = x - mean_x

  if (distinct >= 3) {
    // Normal equations in the centered variable for conditioning.
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (const auto& [x, y] : points) {
      const double u = x - mean_x;
      const double u2 = u * u;
      s1 += u;
      s2 += u2;
      s3 += u2 * u;
      s4 += u2 * u2;
      t0 += y;
      t1 += u * y;
      t2 += u2 * y;
    }
    double m[3][4] = {{n, s1, s2, t0}, {s1, s2, s3, t1}, {s2, s3, s4, t2}};
    for (int col = 0; col < 3; ++col) {
      int pivot = col;
      for (int r = col + 1; r < 3; ++r)
        if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
      std::swap(m[col], m[pivot]);
      for (int r = 0; r < 3; ++r) {
        if (r == col) continue;
        const double f = m[r][col] / m[col][col];
        for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
      }
    }
    a0 = m[0][3] / m[0][0];
    a1 = m[1][3] / m[1][1];
    a2 = m[2][3] / m[2][2];
  } else if (distinct == 2) {
    fit.degenerate = true;
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : points) {
      sxx += (x - mean_x) * (x - mean_x);
      sxy += (x - mean_x) * (y - mean_y);
    }
    a1 = sxy / sxx;
    a0 = mean_y;
  } else {
    fit.degenerate = true;  // single abscissa: constant fit
  }

  // Expand back to coefficients of x.
  fit.c2 = a2;
  fit.c1 = a1 - 2.0 * a2 * mean_x;
  fit.c0 = a0 - a1 * mean_x + a2 * mean_x * mean_x;

  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [x, y] : points) {
    const double u = x - mean_x;
    const double pred = a0 + a1 * u + a2 * u * u;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace muxdt
