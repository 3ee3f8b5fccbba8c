#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace microcircuit::random {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32-10 bijection (Salmon et al., SC'11).
inline Block philox4x32(Block ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent consumers of one seed. Each gets its own Philox key.
enum class Domain : std::uint32_t {
  kConnectivity = 1,
  kPlacement = 2,
  kMembraneInit = 3,
  kExternalDrive = 4,
  kSampling = 5,
  kTest = 99,
};

constexpr Key make_key(std::uint64_t seed, Domain domain) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(domain)));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

/// 53-bit uniform in the open interval (0, 1).
inline double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Sequential draws from the stream addressed by (key, stream, substream).
/// Streams are independent of each other and of the order in which they are
/// visited, so any partition of work reproduces the same numbers.
class CounterRng {
 public:
  CounterRng(Key key, std::uint64_t stream, std::uint32_t substream = 0)
      : key_(key), stream_(stream), substream_(substream) {}

  std::uint64_t next_u64() {
    if (lane_ == 2) refill();
    const std::uint64_t v = (static_cast<std::uint64_t>(block_[2 * lane_ + 1]) << 32) | block_[2 * lane_];
    ++lane_;
    return v;
  }

  double uniform() { return to_open_unit(next_u64()); }

  /// Uniform integer in [0, n); multiply-shift with bias below n / 2^64.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t poisson(double mean);

 private:
  void refill() {
    block_ = philox4x32({counter_++, static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                         substream_},
                        key_);
    lane_ = 0;
  }

  Key key_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint32_t counter_ = 0;
  Block block_{};
  int lane_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Poisson count by sequential inversion from a single uniform.
/// `exp_neg_mean` is exp(-mean); intended for small means.
inline std::uint64_t poisson_inversion(double u, double mean, double exp_neg_mean) {
  double p = exp_neg_mean;
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // exhausted double precision in the tail
    cdf = next;
  }
  return k;
}

inline std::uint64_t CounterRng::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) return poisson_inversion(uniform(), mean, std::exp(-mean));
  // PTRS transformed rejection (Hoermann 1993).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

}  // namespace microcircuit::random
