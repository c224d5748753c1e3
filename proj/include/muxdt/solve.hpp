#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "muxdt/core.hpp"

namespace muxdt {

/// Target DTF cannot be bracketed by the probed rates.
class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& msg, double lo, double hi, double dtf_lo, double dtf_hi)
      : std::runtime_error(msg), lo(lo), hi(hi), dtf_lo(dtf_lo), dtf_hi(dtf_hi) {}
  double lo, hi, dtf_lo, dtf_hi;
};

/// The DTF samples violated the assumed monotonicity.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RateAtDtfResult {
  double rate = 0.0;        // photons/s (CW) or event probability p (pulsed)
  double target_dtf = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
};

struct BisectOptions {
  double rel_tol = 1e-6;
  int max_iterations = 60;
  double monotone_slack = 1e-12;  // tolerated non-monotone jitter in DTF samples
  bool log_scale = true;          // bisect in log(rate); requires lo > 0
};

/// Bisection on a monotone non-decreasing DTF(rate) curve. Requires
/// DTF(lo) <= target <= DTF(hi); throws BracketError otherwise and
/// ModelError when a midpoint sample falls outside the bracket's DTF range
/// by more than the slack.
RateAtDtfResult bisect_rate(const std::function<double(double)>& dtf_of_rate,
                            double target, double lo, double hi,
                            const BisectOptions& options = {});

/// Bisection against a Monte Carlo objective. Each evaluation receives a
/// fresh probe index for independent substreams; the search stops at
/// rel_tol or once the bracket is narrower than the statistical resolution
/// implied by the estimate's std_err.
RateAtDtfResult bisect_rate_mc(
    const std::function<DtfEstimate(double rate, std::uint64_t probe)>& estimate_at,
    double target, double lo, double hi, const BisectOptions& options = {});

/// Shrink [lo, hi] toward the target crossing by doubling/halving probes.
/// Keeps DTF(lo) <= target <= DTF(hi); throws BracketError if the target
/// is outside the curve's range on [lo, hi].
void shrink_bracket(const std::function<double(double)>& dtf_of_rate, double target,
                    double& lo, double& hi);

/// Analytic R(DTF = target) per family. Single/tree/reduced invert in
/// closed form (iterations = 0); multiplexed bisects Eq.-style recursion
/// output over the default CW bracket [1, 1e12] photons/s.
RateAtDtfResult cw_rate_at_dtf(Family family, double deadtime, int n_detectors,
                               double target);

/// Pulsed counterpart; solves for the event probability p in [0, 1] at
/// fixed repetition rate. result.rate is p (multiply by nu for an
/// incident event rate).
RateAtDtfResult pulsed_rate_at_dtf(Family family, double rep_rate_nu, double deadtime,
                                   int n_detectors, double target);

struct SpeedupPoint {
  int n_detectors = 0;
  double rate = 0.0;     // photons/s (CW) or p (pulsed)
  double speedup = 0.0;  // rate relative to the same family at N = 1
  int iterations = 0;
};

/// R(DTF = target) for N = 1 .. n_max. Closed-form families report exact
/// N-fold speedups.
std::vector<SpeedupPoint> speedup_curve(Mode mode, Family family, double deadtime,
                                        double rep_rate_nu, double target, int n_max);

struct PolyFit2 {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;  // fewer than 3 distinct abscissae; c2 forced to 0
};

/// Least-squares quadratic y = c0 + c1 x + c2 x^2 with goodness of fit.
PolyFit2 fit_poly2(const std::vector<std::pair<double, double>>& points);

}  // namespace muxdt
