#include "muxdt/dist.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "quad.hpp"

using namespace muxdt;

namespace {

// Enumeration oracle: probability of exactly k events in n Bernoulli(p)
// pulses, summed over all 2^n outcome patterns.
double enumerate_exactly_k(int k, int n, double p) {
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int bits = __builtin_popcount(mask);
    if (bits != k) continue;
    total += std::pow(p, bits) * std::pow(1.0 - p, n - bits);
  }
  return total;
}

// Enumeration oracle: probability of at least k events in n pulses.
double enumerate_at_least_k(int k, int n, double p) {
  double total = 0.0;
  for (int j = k; j <= n; ++j) total += enumerate_exactly_k(j, n, p);
  return total;
}

}  // namespace

TEST_CASE("binomial pmf matches enumeration") {
  CHECK(binomial_pmf(2, 3, 0.5) == doctest::Approx(enumerate_exactly_k(2, 3, 0.5)).epsilon(1e-14));
  CHECK(binomial_pmf(2, 3, 0.5) == doctest::Approx(0.375).epsilon(1e-14));
  for (int n = 0; n <= 6; ++n)
    for (int k = 0; k <= n; ++k)
      for (double p : {0.1, 0.3, 0.7})
        CHECK(binomial_pmf(k, n, p) ==
              doctest::Approx(enumerate_exactly_k(k, n, p)).epsilon(1e-12));
}

TEST_CASE("binomial pmf edges") {
  CHECK(binomial_pmf(0, 10, 0.0) == 1.0);
  CHECK(binomial_pmf(3, 10, 0.0) == 0.0);
  CHECK(binomial_pmf(10, 10, 1.0) == 1.0);
  CHECK(binomial_pmf(9, 10, 1.0) == 0.0);
  CHECK_THROWS_AS(binomial_pmf(4, 3, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_pmf(-1, 3, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_pmf(1, 3, 1.5), std::invalid_argument);
}

TEST_CASE("binomial pmf large-trial path is normalized") {
  double sum = 0.0;
  for (int n = 0; n <= 1000; ++n) sum += binomial_pmf(n, 1000, 0.3);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("geometric wait pmf") {
  for (double p : {0.1, 0.5, 0.9}) CHECK(geometric_wait_pmf(1, p) == p);
  CHECK(geometric_wait_pmf(3, 0.5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(geometric_wait_pmf(1, 1.0) == 1.0);
  CHECK(geometric_wait_pmf(5, 1.0) == 0.0);
  CHECK_THROWS_AS(geometric_wait_pmf(0, 0.5), std::invalid_argument);
}

TEST_CASE("generalized geometric pmf") {
  CHECK(generalized_geometric_pmf(3, 2, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(generalized_geometric_pmf(2, 2, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(generalized_geometric_pmf(1, 2, 0.5), std::invalid_argument);

  // k = 1 reduces to the plain geometric wait.
  for (std::int64_t n = 1; n <= 20; ++n)
    for (double p : {0.05, 0.3, 0.6, 0.95, 1.0})
      CHECK(generalized_geometric_pmf(n, 1, p) ==
            doctest::Approx(geometric_wait_pmf(n, p)).epsilon(1e-14));
}

TEST_CASE("wait-time sums match the enumeration oracle") {
  for (int n_pulses = 1; n_pulses <= 10; ++n_pulses) {
    for (int k = 1; k <= n_pulses; ++k) {
      for (double p : {0.2, 0.5, 0.8}) {
        double wait_sum = 0.0;
        for (int n = k; n <= n_pulses; ++n) wait_sum += generalized_geometric_pmf(n, k, p);
        CHECK(wait_sum ==
              doctest::Approx(enumerate_at_least_k(k, n_pulses, p)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("geometric-binomial identity residual vanishes") {
  CHECK(std::abs(geometric_binomial_identity_residual(2, 3, 0.5)) < 1e-12);
  CHECK(std::abs(geometric_binomial_identity_residual(1, 5, 0.3)) < 1e-12);
  for (std::int64_t n = 1; n <= 10; ++n)
    for (std::int64_t k = 1; k <= n; ++k) {
      for (int ip = 1; ip <= 9; ++ip)
        CHECK(std::abs(geometric_binomial_identity_residual(k, n, 0.1 * ip)) < 1e-12);
      CHECK(geometric_binomial_identity_residual(k, n, 1.0) == 0.0);
    }
  CHECK_THROWS_AS(geometric_binomial_identity_residual(3, 2, 0.5), std::invalid_argument);
}

TEST_CASE("cw interarrival densities normalize and respect support") {
  for (double x : {0.05, 0.5, 2.0}) {
    const double lambda = 1.0, deadtime = x;
    const auto dens = cw_interarrival_densities(lambda, deadtime);

    const double upper = deadtime + 60.0 / lambda;
    const double full = testsupport::integrate(
        [&](double g) { return dens.refire_gap_density(g); }, deadtime, upper, 1e-12);
    CHECK(full == doctest::Approx(1.0).epsilon(1e-9));

    const double blocked = testsupport::integrate(
        [&](double g) { return dens.blocked_gap_density(g); }, 0.0, deadtime, 1e-12);
    CHECK(blocked == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(dens.refire_gap_density(0.5 * deadtime) == 0.0);
    CHECK(dens.refire_gap_density(deadtime) == 0.0);
    CHECK(dens.blocked_gap_density(-1.0) == 0.0);
    CHECK(dens.blocked_gap_density(deadtime) == 0.0);
    CHECK(dens.blocked_gap_density(1.5 * deadtime) == 0.0);
  }
  // Physical scale.
  const auto dens = cw_interarrival_densities(2e6, 50e-9);
  const double full = testsupport::integrate(
      [&](double g) { return dens.refire_gap_density(g); }, 50e-9, 50e-9 + 60.0 / 2e6,
      1e-12);
  CHECK(full == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(cw_interarrival_densities(0.0, 50e-9), std::invalid_argument);
  CHECK_THROWS_AS(cw_interarrival_densities(2e6, 0.0), std::invalid_argument);
}

TEST_CASE("pulsed interarrival pmfs normalize and respect support") {
  for (std::int64_t nd : {1, 4, 20}) {
    for (double p : {0.05, 0.5, 1.0}) {
      const auto pmfs = pulsed_interarrival_pmfs(p, DeadPulseCount{nd});
      double blocked = 0.0;
      for (std::int64_t n = 1; n <= nd; ++n) blocked += pmfs.blocked_gap_pmf(n);
      CHECK(blocked == doctest::Approx(1.0).epsilon(1e-12));

      double refire = 0.0;
      for (std::int64_t n = nd + 1; n <= nd + 4000; ++n) refire += pmfs.refire_gap_pmf(n);
      if (p < 1.0) refire += std::pow(1.0 - p, 4000.0);
      CHECK(refire == doctest::Approx(1.0).epsilon(1e-11));

      CHECK(pmfs.refire_gap_pmf(nd) == 0.0);
      CHECK(pmfs.blocked_gap_pmf(0) == 0.0);
      CHECK(pmfs.blocked_gap_pmf(nd + 1) == 0.0);
    }
  }
  // Deterministic refire at the first live pulse when p = 1.
  const auto pmfs = pulsed_interarrival_pmfs(1.0, DeadPulseCount{4});
  CHECK(pmfs.refire_gap_pmf(5) == 1.0);
  CHECK(pmfs.refire_gap_pmf(6) == 0.0);
  CHECK_THROWS_AS(pulsed_interarrival_pmfs(0.5, DeadPulseCount{0}), std::invalid_argument);
}

TEST_CASE("dist self-check runs clean and the fault hook trips it") {
  const auto good = run_dist_check(false);
  CHECK(good.passed);
  CHECK(good.cases_run > 500);
  CHECK(good.max_abs_residual < 1e-12);

  const auto bad = run_dist_check(true);
  CHECK_FALSE(bad.passed);
  CHECK(bad.failures.size() == 1);
}
