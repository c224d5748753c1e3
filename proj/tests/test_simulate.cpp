#include "muxdt/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "muxdt/analytic.hpp"

using namespace muxdt;

namespace {

void check_accounting(const DtfEstimate& est) {
  const std::int64_t counted = std::accumulate(est.per_detector_counts.begin(),
                                               est.per_detector_counts.end(),
                                               std::int64_t{0});
  CHECK(counted + est.missed_events == est.total_events);
  if (est.total_events > 0)
    CHECK(est.dtf == static_cast<double>(est.missed_events) /
                         static_cast<double>(est.total_events));
}

DetectorPool random_pool(RandomStream& rng, int max_detectors) {
  const int n = 1 + static_cast<int>(rng.next_double() * max_detectors);
  std::vector<double> deadtimes;
  for (int i = 0; i < n; ++i) deadtimes.push_back(10e-9 + 90e-9 * rng.next_double());
  return DetectorPool(deadtimes);
}

}  // namespace

TEST_CASE("cw stream generation: determinism, support, moments") {
  RandomStream a(7, 3), b(7, 3);
  const auto s1 = gen_cw_stream(1e6, 200000, a);
  const auto s2 = gen_cw_stream(1e6, 200000, b);
  CHECK(s1.arrival_times == s2.arrival_times);
  CHECK(s1.window == s1.arrival_times.back());

  double prev = 0.0;
  for (double t : s1.arrival_times) {
    CHECK(t > prev);
    prev = t;
  }

  // Exponential gap moments within 5 standard errors.
  const std::size_t n = s1.arrival_times.size();
  std::vector<double> gaps(n);
  double last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gaps[i] = s1.arrival_times[i] - last;
    last = s1.arrival_times[i];
  }
  const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / n;
  CHECK(std::abs(mean - 1e-6) < 5.0 * 1e-6 / std::sqrt(static_cast<double>(n)));
  double var = 0.0;
  for (double g : gaps) var += (g - mean) * (g - mean);
  var /= static_cast<double>(n - 1);
  const double var_se = 1e-12 * std::sqrt(2.0 / static_cast<double>(n - 1));
  CHECK(std::abs(var - 1e-12) < 5.0 * var_se);
}

TEST_CASE("pulsed stream generation") {
  RandomStream rng(9, 0);
  const auto all = gen_pulsed_stream(1.0, 1000, rng);
  CHECK(all.event_pulse_indices.size() == 1000);
  const auto none = gen_pulsed_stream(0.0, 1000, rng);
  CHECK(none.event_pulse_indices.empty());

  RandomStream r2(10, 0);
  const auto half = gen_pulsed_stream(0.5, 1000000, r2);
  const double count = static_cast<double>(half.event_pulse_indices.size());
  CHECK(std::abs(count - 5e5) < 5.0 * std::sqrt(1e6 * 0.25));
  std::int64_t prev = -1;
  for (std::int64_t i : half.event_pulse_indices) {
    CHECK(i > prev);
    CHECK(i < half.n_pulses);
    prev = i;
  }
}

TEST_CASE("cascade basics") {
  const DetectorPool one({50e-9});

  // A single photon is never lost.
  CHECK(cascade_cw(CwEventStream{{1e-6}, 1e-6}, one).dtf == 0.0);

  // Two photons within one deadtime of a lone detector: half lost.
  const CwEventStream pair{{1e-7, 1.2e-7}, 1.2e-7};
  const auto est = cascade_cw(pair, one);
  CHECK(est.dtf == 0.5);
  CHECK(est.missed_events == 1);
  check_accounting(est);

  // Same photons with a second detector: nothing lost.
  CHECK(cascade_cw(pair, DetectorPool({50e-9, 50e-9})).dtf == 0.0);

  // Empty stream is flagged by total_events = 0.
  const auto empty = cascade_cw(CwEventStream{{}, 0.0}, one);
  CHECK(empty.total_events == 0);
  CHECK(empty.dtf == 0.0);
}

TEST_CASE("cw Monte Carlo converges to the single-detector closed form") {
  SimConfig config{CwSource(2e6), DetectorPool({50e-9}), Routing::FirstLive,
                   10000000, 10};
  const auto est = estimate_dtf(config, RandomStream(21, 0));
  check_accounting(est);
  CHECK(std::abs(est.dtf - 0.0909090909090909) < 3.0 * est.std_err);
}

TEST_CASE("pulsed exact periodic orbits at p = 1") {
  RandomStream rng(3, 0);
  const auto stream = gen_pulsed_stream(1.0, 1000000, rng);

  const auto one = cascade_pulsed(stream, DetectorPool({50e-9}), 82e6);
  CHECK(one.missed_events == 800000);
  CHECK(one.dtf == 0.8);
  check_accounting(one);

  const auto two = cascade_pulsed(stream, DetectorPool::homogeneous(2, 50e-9), 82e6);
  CHECK(two.missed_events == 600000);
  CHECK(two.dtf == 0.6);

  const auto five = cascade_pulsed(stream, DetectorPool::homogeneous(5, 50e-9), 82e6);
  CHECK(five.missed_events == 0);
  CHECK(five.dtf == 0.0);
}

TEST_CASE("pulsed zero-dtf once the pool outnumbers the dead pulses") {
  for (double p : {0.1, 0.5, 1.0}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      RandomStream rng(seed, 0);
      const auto stream = gen_pulsed_stream(p, 200000, rng);
      const auto est = cascade_pulsed(stream, DetectorPool::homogeneous(5, 50e-9), 82e6);
      CHECK(est.missed_events == 0);
    }
  }
}

TEST_CASE("multipass equals the online scheduler") {
  RandomStream rng(17, 0);
  for (int trial = 0; trial < 400; ++trial) {
    RandomStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    const auto pool = random_pool(sub, 4);
    const std::int64_t n = 2 + static_cast<std::int64_t>(sub.next_double() * 200);
    if (trial % 2 == 0) {
      const double lambda = 1e6 + 2e8 * sub.next_double();
      const auto stream = gen_cw_stream(lambda, n, sub);
      const auto online = cascade_cw(stream, pool);
      const auto multipass = cascade_cw_multipass(stream, pool);
      CHECK(online.missed_events == multipass.missed_events);
      CHECK(online.per_detector_counts == multipass.per_detector_counts);
      check_accounting(online);
      check_accounting(multipass);
    } else {
      const double p = 0.05 + 0.95 * sub.next_double();
      const auto stream = gen_pulsed_stream(p, n * 5, sub);
      const auto online = cascade_pulsed(stream, pool, 82e6);
      const auto multipass = cascade_pulsed_multipass(stream, pool, 82e6);
      CHECK(online.missed_events == multipass.missed_events);
      CHECK(online.per_detector_counts == multipass.per_detector_counts);
    }
  }
}

TEST_CASE("streaming a split stream equals one batch run") {
  RandomStream rng(23, 0);
  for (int trial = 0; trial < 200; ++trial) {
    RandomStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    const auto pool = random_pool(sub, 4);
    const auto stream = gen_cw_stream(5e7, 300, sub);
    const auto whole = cascade_cw(stream, pool);

    const std::size_t cut =
        static_cast<std::size_t>(sub.next_double() * stream.arrival_times.size());
    CwEventStream head{{stream.arrival_times.begin(), stream.arrival_times.begin() + cut},
                       stream.window};
    CwEventStream tail{{stream.arrival_times.begin() + cut, stream.arrival_times.end()},
                       stream.window};
    CwCascadeState state;
    const auto first = cascade_cw(head, pool, &state);
    const auto second = cascade_cw(tail, pool, &state);
    CHECK(first.missed_events + second.missed_events == whole.missed_events);
    for (std::size_t d = 0; d < pool.deadtimes().size(); ++d)
      CHECK(first.per_detector_counts[d] + second.per_detector_counts[d] ==
            whole.per_detector_counts[d]);
  }

  // Pulsed counterpart.
  for (int trial = 0; trial < 100; ++trial) {
    RandomStream sub = rng.substream(1000 + static_cast<std::uint64_t>(trial));
    const auto pool = random_pool(sub, 3);
    const auto stream = gen_pulsed_stream(0.7, 500, sub);
    const auto whole = cascade_pulsed(stream, pool, 82e6);
    const std::size_t cut = static_cast<std::size_t>(
        sub.next_double() * stream.event_pulse_indices.size());
    PulsedEventStream head{{stream.event_pulse_indices.begin(),
                            stream.event_pulse_indices.begin() + cut},
                           stream.n_pulses};
    PulsedEventStream tail{{stream.event_pulse_indices.begin() + cut,
                            stream.event_pulse_indices.end()},
                           stream.n_pulses};
    PulsedCascadeState state;
    const auto first = cascade_pulsed(head, pool, 82e6, &state);
    const auto second = cascade_pulsed(tail, pool, 82e6, &state);
    CHECK(first.missed_events + second.missed_events == whole.missed_events);
  }
}

TEST_CASE("a detector only fires while all earlier detectors are dead") {
  RandomStream rng(31, 0);
  for (int trial = 0; trial < 100; ++trial) {
    RandomStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    const auto pool = random_pool(sub, 5);
    const auto stream = gen_cw_stream(8e7, 400, sub);
    const auto assignment = cascade_cw_assign(stream, pool);

    // Replay the timeline from the assignment itself.
    std::vector<double> next_free(pool.deadtimes().size(), 0.0);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      const double t = stream.arrival_times[i];
      const int d = assignment[i];
      const int limit = d < 0 ? static_cast<int>(pool.deadtimes().size()) : d;
      for (int k = 0; k < limit; ++k) CHECK(next_free[static_cast<std::size_t>(k)] > t);
      if (d >= 0) {
        CHECK(next_free[static_cast<std::size_t>(d)] <= t);
        next_free[static_cast<std::size_t>(d)] = t + pool.deadtimes()[static_cast<std::size_t>(d)];
      }
    }
  }
}

TEST_CASE("homogeneous pools are order insensitive") {
  RandomStream rng(37, 0);
  const auto stream = gen_cw_stream(5e7, 5000, rng);
  const auto a = cascade_cw(stream, DetectorPool::homogeneous(4, 50e-9));
  const auto b = cascade_cw(stream, DetectorPool({50e-9, 50e-9, 50e-9, 50e-9}));
  CHECK(a.missed_events == b.missed_events);
  CHECK(a.per_detector_counts == b.per_detector_counts);
}

TEST_CASE("estimate_dtf is deterministic and batch-consistent") {
  SimConfig config{CwSource(7e7), DetectorPool::homogeneous(6, 50e-9),
                   Routing::FirstLive, 300000, 6};
  const auto a = estimate_dtf(config, RandomStream(5, 1));
  const auto b = estimate_dtf(config, RandomStream(5, 1));
  CHECK(a.dtf == b.dtf);
  CHECK(a.std_err == b.std_err);
  CHECK(a.per_detector_counts == b.per_detector_counts);
  CHECK(a.total_events == 300000);
  check_accounting(a);

  const auto c = estimate_dtf(config, RandomStream(5, 2));
  CHECK(a.per_detector_counts != c.per_detector_counts);  // different substream

  CHECK_THROWS_AS(estimate_dtf(SimConfig{CwSource(1e6), DetectorPool({50e-9}),
                                         Routing::FirstLive, 100, 1},
                               RandomStream(0, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_dtf(SimConfig{CwSource(1e6), DetectorPool({50e-9}),
                                         Routing::FirstLive, 3, 8},
                               RandomStream(0, 0)),
                  std::invalid_argument);
}

TEST_CASE("estimate_dtf agrees with analytic at moderate load") {
  // N = 6 at lambda*t_d = 1, inside the regime where the recursion tracks
  // the simulation (the acceptance suite surveys the full range).
  SimConfig config{CwSource(2e7), DetectorPool::homogeneous(6, 50e-9),
                   Routing::FirstLive, 1000000, 10};
  const auto est = estimate_dtf(config, RandomStream(1234, 0));
  const double analytic = cw_multiplexed_dtf(2e7, 50e-9, 6).dtf;
  CHECK(std::abs(est.dtf - analytic) < std::max(0.01, 3.0 * est.std_err));
}

TEST_CASE("pulsed estimate with p = 0 is an empty, zero-error run") {
  SimConfig config{PulsedSource(82e6, 0.0), DetectorPool({50e-9}), Routing::FirstLive,
                   10000, 4};
  const auto est = estimate_dtf(config, RandomStream(0, 0));
  CHECK(est.dtf == 0.0);
  CHECK(est.std_err == 0.0);
  CHECK(est.total_events == 0);
}

TEST_CASE("tree routing converges to the splitter closed form") {
  SimConfig config{CwSource(4e7), DetectorPool::homogeneous(4, 50e-9),
                   Routing::UniformRandom, 1000000, 10};
  const auto est = estimate_dtf(config, RandomStream(77, 0));
  const double analytic = cw_tree_dtf(4e7, 50e-9, 4);
  CHECK(std::abs(est.dtf - analytic) < std::max(0.003, 4.0 * est.std_err));
  check_accounting(est);

  SimConfig pulsed{PulsedSource(82e6, 0.6), DetectorPool::homogeneous(3, 50e-9),
                   Routing::UniformRandom, 1000000, 10};
  const auto pest = estimate_dtf(pulsed, RandomStream(78, 0));
  const double panalytic = pulsed_tree_dtf(0.6, dead_pulse_count(82e6, 50e-9), 3);
  CHECK(std::abs(pest.dtf - panalytic) < std::max(0.003, 4.0 * pest.std_err));
}
