#include "muxdt/solve.hpp"

#include <doctest.h>

#include <cmath>

#include "muxdt/analytic.hpp"
#include "muxdt/simulate.hpp"

using namespace muxdt;

TEST_CASE("closed-form rate inversions") {
  const auto single = cw_rate_at_dtf(Family::Single, 50e-9, 1, 0.10);
  CHECK(single.rate == doctest::Approx(2222222.2222222225).epsilon(1e-12));
  CHECK(single.iterations == 0);

  const auto tree6 = cw_rate_at_dtf(Family::Tree, 50e-9, 6, 0.10);
  CHECK(tree6.rate == 6.0 * single.rate);  // bitwise: closed form multiplies
  CHECK(cw_rate_at_dtf(Family::Reduced, 50e-9, 6, 0.10).rate == tree6.rate);
}

TEST_CASE("bisection on the generic single-detector curve") {
  auto dtf = [](double rate) { return cw_single_dtf(rate, 50e-9); };
  double lo = 1.0, hi = 1e12;
  shrink_bracket(dtf, 0.10, lo, hi);
  const auto r = bisect_rate(dtf, 0.10, lo, hi);
  CHECK(r.rate == doctest::Approx(2222222.2222222225).epsilon(1e-5));
  CHECK(r.iterations <= 60);
  CHECK(r.bracket_lo <= r.rate);
  CHECK(r.rate <= r.bracket_hi);
  // Round trip: the model returns the target at the solved rate.
  CHECK(dtf(r.rate) == doctest::Approx(0.10).epsilon(1e-4));
  CHECK(std::abs(dtf(r.rate) - 0.10) < 1e-5);
}

TEST_CASE("multiplexed solve hits the paper's headline ratio") {
  const auto single = cw_rate_at_dtf(Family::Single, 50e-9, 1, 0.10);
  const auto mux6 = cw_rate_at_dtf(Family::Multiplexed, 50e-9, 6, 0.10);
  const double ratio = mux6.rate / single.rate;
  CHECK(ratio > 27.0);
  CHECK(ratio < 37.0);
  CHECK(mux6.iterations <= 60);
  CHECK(cw_multiplexed_dtf(mux6.rate, 50e-9, 6).dtf ==
        doctest::Approx(0.10).epsilon(1e-4));
}

TEST_CASE("bracket and model errors") {
  auto dtf = [](double rate) { return cw_single_dtf(rate, 50e-9); };
  // Target above the curve's range on the bracket.
  CHECK_THROWS_AS(bisect_rate(dtf, 0.9999, 1.0, 1e6), BracketError);
  try {
    bisect_rate(dtf, 0.9999, 1.0, 1e6);
  } catch (const BracketError& e) {
    CHECK(e.dtf_hi < 0.9999);
    CHECK(e.lo == 1.0);
    CHECK(e.hi == 1e6);
  }
  CHECK_THROWS_AS(cw_rate_at_dtf(Family::Single, 50e-9, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cw_rate_at_dtf(Family::Single, 50e-9, 1, 1.0), std::invalid_argument);

  auto bumpy = [](double rate) {
    return rate > 1e6 && rate < 2e6 ? 0.9 : cw_single_dtf(rate, 50e-9);
  };
  CHECK_THROWS_AS(bisect_rate(bumpy, 0.10, 1.0, 1e12), ModelError);
}

TEST_CASE("pulsed rate solves") {
  // Single, N_d = 4, target 10%: p = (1/9)/4.
  const auto single = pulsed_rate_at_dtf(Family::Single, 82e6, 50e-9, 1, 0.10);
  CHECK(single.rate == doctest::Approx(1.0 / 36.0).epsilon(1e-12));

  const auto tree = pulsed_rate_at_dtf(Family::Tree, 82e6, 50e-9, 4, 0.10);
  CHECK(tree.rate == doctest::Approx(4.0 / 36.0).epsilon(1e-12));

  const auto reduced = pulsed_rate_at_dtf(Family::Reduced, 82e6, 50e-9, 4, 0.10);
  CHECK(reduced.rate == doctest::Approx(1.0 / 9.0).epsilon(1e-12));  // N_d drops to 1

  const auto mux = pulsed_rate_at_dtf(Family::Multiplexed, 82e6, 50e-9, 2, 0.10);
  CHECK(pulsed_multiplexed_dtf(mux.rate, DeadPulseCount{4}, 2).dtf ==
        doctest::Approx(0.10).epsilon(1e-4));

  // Unreachable: five detectors against four dead pulses.
  CHECK_THROWS_AS(pulsed_rate_at_dtf(Family::Multiplexed, 82e6, 50e-9, 5, 0.10),
                  BracketError);
  // Unreachable: reduced deadtime below the pulse period.
  CHECK_THROWS_AS(pulsed_rate_at_dtf(Family::Reduced, 82e6, 50e-9, 5, 0.10),
                  BracketError);
}

TEST_CASE("speedup curves") {
  const auto tree = speedup_curve(Mode::Cw, Family::Tree, 50e-9, 0.0, 0.10, 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(tree[static_cast<std::size_t>(i)].n_detectors == i + 1);
    CHECK(tree[static_cast<std::size_t>(i)].speedup == static_cast<double>(i + 1));
    CHECK(tree[static_cast<std::size_t>(i)].rate == (i + 1.0) * tree[0].rate);
  }

  const auto mux = speedup_curve(Mode::Cw, Family::Multiplexed, 50e-9, 0.0, 0.10, 8);
  CHECK(mux[0].speedup == 1.0);
  for (int i = 1; i < 8; ++i) {
    // Strictly superlinear beyond one detector.
    CHECK(mux[static_cast<std::size_t>(i)].speedup >
          static_cast<double>(i + 1));
    CHECK(mux[static_cast<std::size_t>(i)].speedup >
          mux[static_cast<std::size_t>(i - 1)].speedup);
  }

  // Multiplexed beats tree = reduced at every N >= 2.
  for (int i = 1; i < 8; ++i)
    CHECK(mux[static_cast<std::size_t>(i)].rate > tree[static_cast<std::size_t>(i)].rate);
}

TEST_CASE("quadratic fit") {
  std::vector<std::pair<double, double>> exact;
  for (int n = 1; n <= 12; ++n) exact.emplace_back(n, static_cast<double>(n) * n);
  const auto fit = fit_poly2(exact);
  CHECK(fit.c2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(fit.c1) < 1e-9);
  CHECK(std::abs(fit.c0) < 1e-9);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(fit.degenerate);

  std::vector<std::pair<double, double>> linear;
  for (int n = 1; n <= 6; ++n) linear.emplace_back(n, 3.0 * n + 2.0);
  const auto lfit = fit_poly2(linear);
  CHECK(std::abs(lfit.c2) < 1e-9);
  CHECK(lfit.c1 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(lfit.r_squared == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(fit_poly2({{1, 1}, {2, 2}}), std::invalid_argument);

  const auto degenerate = fit_poly2({{1, 1}, {1, 2}, {2, 3}, {2, 5}});
  CHECK(degenerate.degenerate);
  CHECK(degenerate.c2 == 0.0);
}

TEST_CASE("multiplexed speedup curve fits a quadratic") {
  const auto mux = speedup_curve(Mode::Cw, Family::Multiplexed, 50e-9, 0.0, 0.10, 12);
  std::vector<std::pair<double, double>> points;
  for (const auto& p : mux) points.emplace_back(p.n_detectors, p.rate);
  const auto fit = fit_poly2(points);
  CHECK(fit.r_squared >= 0.99);
}

TEST_CASE("Monte Carlo backed rate solve") {
  const RandomStream root(404, 0);
  auto estimate = [&](double rate, std::uint64_t probe) {
    SimConfig config{CwSource(rate), DetectorPool({50e-9}), Routing::FirstLive, 200000,
                     5};
    return estimate_dtf(config, root.substream(probe));
  };
  const auto r = bisect_rate_mc(estimate, 0.10, 1e5, 1e8);
  CHECK(r.rate == doctest::Approx(2222222.22).epsilon(0.05));
  CHECK(r.iterations <= 60);
}
