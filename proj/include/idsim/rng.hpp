#pragma once

#include <cstdint>
#include <limits>

namespace idsim {

/// Counter-based random stream.
///
/// Output k of a stream is a bijective 64-bit mix of (key + k * golden_gamma),
/// so any (master seed, stream id) pair addresses an independent, replayable
/// sequence without shared state. Models the UniformRandomBitGenerator
/// concept, so the <random> distributions can sit on top of it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(key) {}

  /// Sub-stream `stream` of master seed `seed`. Distinct (seed, stream) pairs
  /// give distinct keys with overwhelming probability.
  static Rng stream(std::uint64_t seed, std::uint64_t stream);

  /// Sub-stream keyed by (seed, arm, index); used for independent MC arms.
  static Rng stream(std::uint64_t seed, std::uint64_t arm, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + kGamma * (++counter_)); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard exponential (mean one).
  double exponential();
  /// Standard normal, Box-Muller with the spare value cached.
  double normal();

  /// Derive a child stream from the next output; children of one parent are
  /// distinct streams.
  Rng split() { return Rng(mix((*this)() ^ 0x6a09e667f3bcc909ULL)); }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Poisson(mean) variate.
std::uint64_t poisson(Rng& rng, double mean);

/// Gamma(shape, scale) variate.
double gamma(Rng& rng, double shape, double scale = 1.0);

}  // namespace idsim
