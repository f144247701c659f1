#include "idsim/series.hpp"

#include <algorithm>
#include <numbers>
#include <variant>

#include <boost/math/special_functions/erf.hpp>

#include "idsim/quadrature.hpp"

namespace idsim {

double CenteringCache::cumulative(std::uint64_t J, double t) {
  if (J == 0) return 0.0;
  const auto key = std::make_pair(J, t);
  {
    std::lock_guard lock(mutex_);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
  }
  const double value = cumulative_(J, t);
  if (!std::isfinite(value)) throw QuadratureError("centering integral is not finite");
  std::lock_guard lock(mutex_);
  values_.emplace(key, value);
  return value;
}

double excursion_remainder(double level, double tau_w) {
  if (!(level > 0.0)) return 0.0;
  using boost::math::erf;
  using boost::math::erfc;
  const double pi = std::numbers::pi;
  const double c = 0.5 / std::sqrt(2.0 * pi);  // n+(R in dR) = c R^{-3/2} dR
  const double k = 2.0 * level * level;
  const double slope = tau_w * std::sqrt(pi / 2.0);  // tau w f(R) = slope R on R < 1
  // int_0^A R^{-3/2} e^{-k/R} dR and int_0^A R^{-1/2} e^{-k/R} dR
  auto i32 = [&](double A) { return std::sqrt(pi / k) * erfc(std::sqrt(k / A)); };
  auto i12 = [&](double A) {
    return 2.0 * std::sqrt(A) * std::exp(-k / A) - 2.0 * std::sqrt(pi * k) * erfc(std::sqrt(k / A));
  };
  double inner = 0.0;
  if (slope >= 1.0) {
    const double A = 1.0 / slope;
    inner = i32(A) - slope * i12(A);
  } else {
    inner = i32(1.0) - slope * i12(1.0) + (1.0 - slope) * std::sqrt(pi / k) * erf(std::sqrt(k));
  }
  return c * 4.0 * level * std::max(inner, 0.0);
}

namespace {

constexpr double kItoConstant = 0.5 * std::numbers::inv_sqrtpi / std::numbers::sqrt2;  // n+(dR) = c R^{-3/2} dR
const double kTiltSlope = std::sqrt(std::numbers::pi / 2.0);                            // f(R) = slope (R ^ 1)

using TailSampler = std::function<void(Rng&, std::span<const double>, std::span<double>)>;

// R from c R^{-3/2} dR on [lo, hi] (hi may be inf), via R^{-1/2} uniform.
double sample_inverse_sqrt(Rng& rng, double lo, double hi) {
  const double a = 1.0 / std::sqrt(lo);
  const double b = std::isinf(hi) ? 0.0 : 1.0 / std::sqrt(hi);
  const double u = b + (a - b) * rng.uniform();
  return 1.0 / (u * u);
}

TailSampler feller_tail(double a, double kappa, double tau, ExcursionGrid egrid,
                        LocalTimeConfig lt) {
  return [=](Rng& rng, std::span<const double> grid, std::span<double> acc) {
    double lowest = std::numeric_limits<double>::infinity();
    for (double t : grid)
      if (t > 0.0) lowest = std::min(lowest, kappa * t);
    if (std::isinf(lowest)) return;
    // weight (1 - tau f(R) / a)^+ vanishes beyond a / (tau slope) when that is < 1
    const double cut = a / (tau * kTiltSlope);
    const double lo = std::pow(lowest / kExcursionHeightCutoff, 2);
    const double hi = cut < 1.0 ? cut : std::numeric_limits<double>::infinity();
    if (!(hi > lo)) return;
    const double mass =
        a * kItoConstant * 2.0 * (1.0 / std::sqrt(lo) - (std::isinf(hi) ? 0.0 : 1.0 / std::sqrt(hi)));
    const auto count = poisson(rng, mass);
    std::vector<double> levels(grid.size()), v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) levels[i] = kappa * grid[i];
    for (std::uint64_t k = 0; k < count; ++k) {
      const double R = sample_inverse_sqrt(rng, lo, hi);
      const double keep = 1.0 - tau * kTiltSlope * std::min(R, 1.0) / a;
      const LazyExcursion exc{R, rng()};
      if (rng.uniform() >= keep) continue;
      excursion_local_times(exc, levels, egrid, lt, v);
      for (std::size_t i = 0; i < grid.size(); ++i) acc[i] += v[i];
    }
  };
}

// Proposals per grid time t: birth r in the window where level t - r lies in
// (0, 6 sqrt R), intensity beta dr n+(dR). Overlapping windows are undone by
// accepting with probability weight / multiplicity.
TailSampler besq_tail(double beta, double tau, ExcursionGrid egrid, LocalTimeConfig lt) {
  return [=](Rng& rng, std::span<const double> grid, std::span<double> acc) {
    std::vector<double> levels(grid.size()), v(grid.size());
    for (double t : grid) {
      if (!(t > 0.0)) continue;
      const double scaled = tau * std::exp(-beta * t) * kTiltSlope;
      const double hi = scaled >= 1.0 ? 1.0 / scaled : std::numeric_limits<double>::infinity();
      const double lo = kTailLengthFloor;
      if (!(hi > lo)) continue;
      // window length min(6 sqrt R, t): 6/R density below knee, t R^{-3/2} above
      const double knee = std::clamp(std::pow(t / kExcursionHeightCutoff, 2), lo, hi);
      const double m_low = kExcursionHeightCutoff * std::log(knee / lo);
      const double m_high =
          2.0 * t * (1.0 / std::sqrt(knee) - (std::isinf(hi) ? 0.0 : 1.0 / std::sqrt(hi)));
      const auto count = poisson(rng, beta * kItoConstant * (m_low + m_high));
      for (std::uint64_t k = 0; k < count; ++k) {
        const double R = rng.uniform() * (m_low + m_high) < m_low
                             ? lo * std::exp(rng.uniform() * std::log(knee / lo))
                             : sample_inverse_sqrt(rng, knee, hi);
        const double reach = kExcursionHeightCutoff * std::sqrt(R);
        const double r = t - std::min(reach, t) * rng.uniform();
        std::size_t multiplicity = 0;
        for (double s : grid)
          if (s > r && s - r < reach) ++multiplicity;
        const double weight = 1.0 - tau * std::exp(-beta * r) * kTiltSlope * std::min(R, 1.0);
        const LazyExcursion exc{R, rng()};
        if (multiplicity == 0 || rng.uniform() * static_cast<double>(multiplicity) >= weight)
          continue;
        for (std::size_t i = 0; i < grid.size(); ++i) levels[i] = grid[i] - r;
        excursion_local_times(exc, levels, egrid, lt, v);
        for (std::size_t i = 0; i < grid.size(); ++i) acc[i] += v[i];
      }
    }
  };
}

}  // namespace

SeriesConfig<LazyExcursion> feller_config(double a, double sigma, const LengthTilt& tilt,
                                          double tau, std::vector<double> grid,
                                          ExcursionGrid egrid, LocalTimeConfig lt,
                                          bool sample_tail) {
  SeriesConfig<LazyExcursion> cfg;
  cfg.rep = feller_representation(a, sigma, tilt, egrid, lt);
  cfg.tau = tau;
  cfg.grid = std::move(grid);
  cfg.shift = [a](double t) { return t == 0.0 ? a : 0.0; };
  if (sample_tail && tilt.standard) cfg.tail = feller_tail(a, sigma * sigma / 4.0, tau, egrid, lt);
  return cfg;
}

SeriesRealization feller_series(double a, double sigma, const LengthTilt& tilt, double tau,
                                std::vector<double> grid, Rng& rng, ExcursionGrid egrid,
                                LocalTimeConfig lt, bool sample_tail) {
  return generate_series(
      feller_config(a, sigma, tilt, tau, std::move(grid), egrid, lt, sample_tail), rng);
}

SeriesConfig<BesqPoint> besq_config(double beta, double tau, std::vector<double> grid,
                                    const LengthTilt& tilt, ExcursionGrid egrid,
                                    LocalTimeConfig lt, bool sample_tail) {
  SeriesConfig<BesqPoint> cfg;
  cfg.rep = besq_representation(beta, tilt, egrid, lt);
  cfg.tau = tau;
  cfg.grid = std::move(grid);
  if (sample_tail && tilt.standard) cfg.tail = besq_tail(beta, tau, egrid, lt);
  return cfg;
}

SeriesRealization besq_series(double beta, double tau, std::vector<double> grid, Rng& rng,
                              const LengthTilt& tilt, ExcursionGrid egrid, LocalTimeConfig lt,
                              bool sample_tail) {
  return generate_series(
      besq_config(beta, tau, std::move(grid), tilt, egrid, lt, sample_tail), rng);
}

namespace {

bool two_sided(const LevyMeasure& rho) {
  if (const auto* atomic = std::get_if<AtomicMeasure>(&rho)) {
    bool neg = false, pos = false;
    for (const auto& atom : atomic->atoms()) {
      if (atom.weight <= 0.0) continue;
      neg = neg || atom.point[0] < 0.0;
      pos = pos || atom.point[0] > 0.0;
    }
    return neg && pos;
  }
  const auto& ray = std::get<RayDensity>(rho);
  return ray.lo < 0.0 && ray.hi > 0.0;
}

}  // namespace

double levy_cumulative_centering(const LevySeriesModel& model, std::uint64_t J, double t) {
  if (!model.law.measure) throw ModelError("per-term centering needs the jump measure");
  const double span = std::clamp(t, 0.0, model.horizon);
  if (span == 0.0 || J == 0) return 0.0;
  const double scale = model.rate * model.horizon;
  const auto Jd = static_cast<double>(J);
  auto integrand = [&](double v) {
    return model.chi.truncate(v) * std::min(Jd * model.law.weight(v) / scale, 1.0);
  };
  double integral = 0.0;
  if (const auto* atomic = std::get_if<AtomicMeasure>(&*model.law.measure)) {
    KahanSum s;
    for (const auto& atom : atomic->atoms()) s += atom.weight * integrand(atom.point[0]);
    integral = s.value();
  } else {
    const auto& ray = std::get<RayDensity>(*model.law.measure);
    if (ray.direction.size() != 1) throw ModelError("jump density must live on the line");
    const double d = ray.direction[0];
    std::vector<double> breaks = ray.breakpoints;
    breaks.push_back(0.0);
    if (d != 0.0) {
      breaks.push_back(1.0 / std::abs(d));
      breaks.push_back(-1.0 / std::abs(d));
    }
    integral = integrate([&](double x) { return ray.density(x) * integrand(x * d); }, ray.lo,
                         ray.hi, breaks)
                   .value;
  }
  return model.rate * span * integral;
}

SeriesConfig<JumpPoint> levy_config(const LevySeriesModel& model, double tau,
                                    std::vector<double> grid) {
  SeriesConfig<JumpPoint> cfg;
  cfg.rep = levy_representation(model.rate, model.horizon, model.law);
  cfg.tau = tau;
  cfg.grid = std::move(grid);
  cfg.shift = model.shift;
  if (model.law.measure && two_sided(*model.law.measure)) {
    cfg.centering = Centering::PerTerm;
    cfg.centering_cache = std::make_shared<CenteringCache>(
        [model](std::uint64_t J, double t) { return levy_cumulative_centering(model, J, t); });
  }
  return cfg;
}

SeriesRealization levy_series(const LevySeriesModel& model, double tau, std::vector<double> grid,
                              Rng& rng) {
  return generate_series(levy_config(model, tau, std::move(grid)), rng);
}

}  // namespace idsim
