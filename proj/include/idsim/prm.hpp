#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "idsim/errors.hpp"
#include "idsim/levy_representation.hpp"
#include "idsim/measure_core.hpp"
#include "idsim/parallel.hpp"
#include "idsim/rng.hpp"
#include "idsim/stats.hpp"

namespace idsim {

// Poisson random measures on representation spaces.

/// Finite-intensity PRM: Poisson(theta) many iid points from n / theta.
/// Requires rep.finite_mass and a sampler with g = 1/theta.
template <class Point>
PointConfiguration<Point> sample_prm_finite(const LevyRepresentation<Point>& rep, Rng& rng);

/// Strip construction: arrivals (xi_j, Gamma_j) with Gamma_j the partial
/// sums of standard exponentials, stopped at the first Gamma_j > tau. All
/// arrivals are returned with their mark; see is_retained().
template <class Point>
PointConfiguration<Point> sample_prm_thinned(const LevyRepresentation<Point>& rep, double tau,
                                             Rng& rng);

/// g(xi) <= 1/Gamma, closed at the boundary.
template <class Point>
bool is_retained(const LevyRepresentation<Point>& rep, const Point& s, double gamma) {
  return rep.density(s) * gamma <= 1.0;
}

/// The retained arrivals of a thinned configuration: a PRM with intensity n
/// restricted to {s : g(s) <= 1/tau} plus the part of the strip below tau.
template <class Point>
PointConfiguration<Point> retained_points(const LevyRepresentation<Point>& rep,
                                          const PointConfiguration<Point>& arrivals);

/// sum_{s in N} f(s) - compensator(chi), the compensator being the integral
/// of f chi(f) dn supplied by the caller.
template <class Point, class F>
double compensated_integral(const PointConfiguration<Point>& config, F&& f, CutoffFunction chi,
                            const std::function<double(CutoffFunction)>& compensator);

/// N(q) = sum_{s in N} q(s).
template <class Point, class Q>
double N_of_q(const PointConfiguration<Point>& config, Q&& q) {
  KahanSum s;
  for (const auto& e : config.points) s += q(e.point);
  return s.value();
}

/// Compensator of N(f) computed from the pushforward n o f^{-1} (a Levy
/// measure on the line).
std::function<double(CutoffFunction)> compensator_from_law(LevyMeasure law_of_f);

struct CfReport {
  std::vector<double> thetas;
  std::vector<std::complex<double>> empirical;
  std::vector<std::complex<double>> oracle;
  std::vector<double> deviation;  // |empirical - oracle|
  std::vector<double> z;          // max(|z_re|, |z_im|) per theta
  double max_deviation = 0.0;
  double tolerance = 0.0;  // 4 / sqrt(reps)
  std::uint64_t reps = 0;
  bool pass = false;
};

/// Empirical characteristic function of I_N(f) against
/// exp(int (e^{i theta x} - 1 - i theta x chi(x)) (n o f^{-1})(dx)).
/// The PRM is simulated directly, so rep must have finite mass.
template <class Point, class F>
CfReport empirical_cf_check(const LevyRepresentation<Point>& rep, F&& f, CutoffFunction chi,
                            const LevyMeasure& law_of_f, std::span<const double> theta_grid,
                            std::uint64_t reps, std::uint64_t seed);

/// Paired estimates of E sum_{s in N} h(s, N) and int E h(s, N + delta_s) n(ds),
/// the outer integral by MC over s ~ n1 with weight 1/g(s).
template <class Point, class H>
IdentityReport mecke_palm_check(const LevyRepresentation<Point>& rep, H&& h, std::uint64_t reps,
                                std::uint64_t seed, double z_crit = 4.0);

// --- implementation ----------------------------------------------------

void require_finite_mass(const std::optional<double>& mass);
void require_constant_density(double g, double mass);

template <class Point>
PointConfiguration<Point> sample_prm_finite(const LevyRepresentation<Point>& rep, Rng& rng) {
  require_finite_mass(rep.finite_mass);
  const double theta = *rep.finite_mass;
  PointConfiguration<Point> config;
  const auto count = poisson(rng, theta);
  config.points.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Point s = rep.sample(rng);
    if (k == 0) require_constant_density(rep.density(s), theta);
    config.add(std::move(s));
  }
  return config;
}

template <class Point>
PointConfiguration<Point> sample_prm_thinned(const LevyRepresentation<Point>& rep, double tau,
                                             Rng& rng) {
  PointConfiguration<Point> config;
  if (!(tau > 0.0)) return config;
  double gamma = rng.exponential();
  while (gamma <= tau) {
    config.add(rep.sample(rng), gamma);
    gamma += rng.exponential();
  }
  return config;
}

template <class Point>
PointConfiguration<Point> retained_points(const LevyRepresentation<Point>& rep,
                                          const PointConfiguration<Point>& arrivals) {
  PointConfiguration<Point> out;
  for (const auto& e : arrivals.points)
    if (is_retained(rep, e.point, e.mark)) out.points.push_back(e);
  return out;
}

template <class Point, class F>
double compensated_integral(const PointConfiguration<Point>& config, F&& f, CutoffFunction chi,
                            const std::function<double(CutoffFunction)>& compensator) {
  const double c = compensator ? compensator(chi) : 0.0;
  if (!std::isfinite(c)) throw ModelError("non-finite compensator");
  KahanSum s;
  for (const auto& e : config.points) s += f(e.point);
  return s.value() - c;
}

template <class Point, class F>
CfReport empirical_cf_check(const LevyRepresentation<Point>& rep, F&& f, CutoffFunction chi,
                            const LevyMeasure& law_of_f, std::span<const double> theta_grid,
                            std::uint64_t reps, std::uint64_t seed) {
  require_finite_mass(rep.finite_mass);
  const auto compensator = compensator_from_law(law_of_f);
  const double c = compensator(chi);
  const auto integrals = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, i);
    const auto config = sample_prm_finite(rep, rng);
    KahanSum s;
    for (const auto& e : config.points) s += f(e.point);
    return s.value() - c;
  });
  CfReport report;
  report.reps = reps;
  report.tolerance = 4.0 / std::sqrt(static_cast<double>(reps));
  for (double theta : theta_grid) {
    std::vector<double> re(reps), im(reps);
    for (std::uint64_t i = 0; i < reps; ++i) {
      re[i] = std::cos(theta * integrals[i]);
      im[i] = std::sin(theta * integrals[i]);
    }
    const auto mre = estimate_mean(re);
    const auto mim = estimate_mean(im);
    const std::complex<double> emp{mre.mean, mim.mean};
    const std::complex<double> orc = std::exp(poisson_integral_exponent(law_of_f, theta, chi));
    report.thetas.push_back(theta);
    report.empirical.push_back(emp);
    report.oracle.push_back(orc);
    report.deviation.push_back(std::abs(emp - orc));
    report.z.push_back(std::max(std::abs(z_statistic(mre.mean, mre.se, orc.real(), 0.0)),
                                std::abs(z_statistic(mim.mean, mim.se, orc.imag(), 0.0))));
    report.max_deviation = std::max(report.max_deviation, report.deviation.back());
  }
  report.pass = report.max_deviation < report.tolerance;
  return report;
}

template <class Point, class H>
IdentityReport mecke_palm_check(const LevyRepresentation<Point>& rep, H&& h, std::uint64_t reps,
                                std::uint64_t seed, double z_crit) {
  require_finite_mass(rep.finite_mass);
  const auto lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const auto config = sample_prm_finite(rep, rng);
    KahanSum s;
    for (const auto& e : config.points) s += h(e.point, config);
    return s.value();
  });
  const auto rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    Point s = rep.sample(rng);
    const double weight = 1.0 / rep.density(s);
    auto config = sample_prm_finite(rep, rng);
    config.add(s);
    return h(s, config) * weight;
  });
  return compare_independent("mecke_palm", lhs, rhs, z_crit);
}

}  // namespace idsim
