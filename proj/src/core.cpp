#include "muxdt/core.hpp"

#include <cmath>
#include <stdexcept>

namespace muxdt {

namespace {

bool finite(double x) { return std::isfinite(x); }

// SplitMix64 finalizer; also used as the generic 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  return mix64(x);
}

std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

CwSource::CwSource(double rate) : rate_lambda(rate) {
  if (!finite(rate) || rate < 0.0)
    throw std::invalid_argument("CwSource: rate must be finite and >= 0");
}

PulsedSource::PulsedSource(double nu, double p) : rep_rate_nu(nu), p_event(p) {
  if (!finite(nu) || nu <= 0.0)
    throw std::invalid_argument("PulsedSource: repetition rate must be finite and > 0");
  if (!finite(p) || p < 0.0 || p > 1.0)
    throw std::invalid_argument("PulsedSource: event probability must be in [0, 1]");
}

DetectorPool::DetectorPool(std::vector<double> deadtimes, SwitchPolicy policy)
    : deadtimes_(std::move(deadtimes)), policy_(policy) {
  if (deadtimes_.empty())
    throw std::invalid_argument("DetectorPool: need at least one detector");
  for (double t : deadtimes_) {
    if (!finite(t) || t <= 0.0)
      throw std::invalid_argument("DetectorPool: every deadtime must be finite and > 0");
  }
}

DetectorPool DetectorPool::homogeneous(int n_detectors, double deadtime) {
  if (n_detectors < 1)
    throw std::invalid_argument("DetectorPool: detector count must be >= 1");
  return DetectorPool(std::vector<double>(static_cast<std::size_t>(n_detectors), deadtime));
}

bool DetectorPool::is_homogeneous() const {
  for (double t : deadtimes_)
    if (t != deadtimes_.front()) return false;
  return true;
}

double DetectorPool::homogeneous_deadtime() const {
  if (!is_homogeneous())
    throw std::invalid_argument("DetectorPool: pool is not homogeneous");
  return deadtimes_.front();
}

DeadPulseCount dead_pulse_count(double rep_rate_nu, double deadtime_s) {
  if (!finite(rep_rate_nu) || rep_rate_nu <= 0.0)
    throw std::invalid_argument("dead_pulse_count: repetition rate must be finite and > 0");
  if (!finite(deadtime_s) || deadtime_s <= 0.0)
    throw std::invalid_argument("dead_pulse_count: deadtime must be finite and > 0");
  const double product = rep_rate_nu * deadtime_s;
  const double nearest = std::round(product);
  // Snap to the integer when representation error is the only thing
  // separating them, then take the integer part.
  if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, product))
    return DeadPulseCount{static_cast<std::int64_t>(nearest)};
  return DeadPulseCount{static_cast<std::int64_t>(std::floor(product))};
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t x = mix64(seed + 0x9E3779B97F4A7C15ULL) ^
                    mix64(stream_id + 0xD1B54A32D192ED03ULL);
  for (auto& s : state_) s = splitmix64(x);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
    state_[0] = 0x9E3779B97F4A7C15ULL;  // xoshiro must not start all-zero
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl64(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl64(state_[3], 45);
  return result;
}

double RandomStream::next_double() {
  // 53-bit mantissa, offset by half an ulp: never exactly 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_exponential(double rate) {
  if (!finite(rate) || rate <= 0.0)
    throw std::invalid_argument("RandomStream: exponential rate must be > 0");
  return -std::log(next_double()) / rate;
}

bool RandomStream::next_bernoulli(double p) {
  if (!finite(p) || p < 0.0 || p > 1.0)
    throw std::invalid_argument("RandomStream: Bernoulli p must be in [0, 1]");
  return next_double() < p;
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  return RandomStream(seed_, mix64(stream_id_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
}

}  // namespace muxdt
