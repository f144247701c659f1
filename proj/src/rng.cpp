#include "idsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace idsim {

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL)));
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t arm, std::uint64_t index) {
  return stream(mix(seed ^ mix(arm + 0x243f6a8885a308d3ULL)), index);
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

double gamma(Rng& rng, double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(rng);
}

}  // namespace idsim
