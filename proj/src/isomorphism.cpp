#include "idsim/isomorphism.hpp"

#include <algorithm>
#include <variant>

#include "idsim/quadrature.hpp"

namespace idsim {

// ---- Levy processes -----------------------------------------------------

ProcessModel<JumpPoint> levy_process_model(const LevyModel& model, std::vector<double> grid) {
  if (!model.law.total_mass && model.rate > 0.0)
    throw ModelError("Levy process simulation needs a finite jump measure");
  if (!(model.sigma >= 0.0)) throw ModelError("sigma must be >= 0");
  ProcessModel<JumpPoint> pm;
  pm.rep = levy_representation(model.rate, model.horizon, model.law);
  pm.grid = std::move(grid);
  const double drift = model.drift;
  if (drift != 0.0) pm.drift = [drift](double t) { return drift * t; };
  if (model.sigma > 0.0) {
    pm.gaussian = [sigma = model.sigma](Rng& rng, std::span<const double> times,
                                        std::span<double> out) {
      // Brownian motion on the sorted grid, started at 0 at time 0
      std::vector<std::size_t> order(times.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
      double t = 0.0, b = 0.0;
      for (std::size_t i : order) {
        const double dt = std::max(times[i] - t, 0.0);
        b += sigma * std::sqrt(dt) * rng.normal();
        t = std::max(t, times[i]);
        out[i] = b;
      }
    };
  }
  return pm;
}

IdentityReport verify_levy_translation(const LevyModel& model,
                                       const std::function<double(double, double)>& q,
                                       const PathFunctional& F, std::vector<double> grid,
                                       std::uint64_t reps, std::uint64_t seed,
                                       const IsoOptions& opts) {
  const auto pm = levy_process_model(model, std::move(grid));
  auto report = verify_iso2(
      pm, [&](const JumpPoint& p) { return q(p.time, p.size); }, F, reps, seed, opts);
  report.name = "levy_translation";
  return report;
}

Extrapolation richardson(std::span<const double> h, std::span<const double> e,
                         std::span<const double> se) {
  Extrapolation out;
  const std::size_t n = e.size();
  if (n == 0) return out;
  if (n == 1) {
    out.value = e[0];
    out.se = se[0];
    return out;
  }
  double p = 1.0;
  if (n >= 3) {
    const double h1 = h[n - 3], h2 = h[n - 2], h3 = h[n - 1];
    const double ratio = (e[n - 3] - e[n - 2]) / (e[n - 2] - e[n - 1]);
    auto phi = [&](double x) {
      return (std::pow(h1, x) - std::pow(h2, x)) / (std::pow(h2, x) - std::pow(h3, x));
    };
    if (std::isfinite(ratio) && ratio > 0.0) {
      double lo = 0.25, hi = 4.0;
      if (ratio <= phi(lo)) {
        p = lo;
      } else if (ratio >= phi(hi)) {
        p = hi;
      } else {
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          (phi(mid) < ratio ? lo : hi) = mid;
        }
        p = 0.5 * (lo + hi);
      }
    }
  }
  const double a = std::pow(h[n - 2], p);
  const double b = std::pow(h[n - 1], p);
  const double k = b / (a - b);
  out.exponent = p;
  if (!std::isfinite(k)) {
    out.value = e[n - 1];
    out.se = se[n - 1];
    return out;
  }
  out.value = e[n - 1] * (1.0 + k) - e[n - 2] * k;
  out.se = std::sqrt((1.0 + k) * (1.0 + k) * se[n - 1] * se[n - 1] + k * k * se[n - 2] * se[n - 2]);
  return out;
}

namespace {

double integrate_against(const LevyMeasure& rho, const std::function<double(double)>& f) {
  if (const auto* atomic = std::get_if<AtomicMeasure>(&rho)) {
    KahanSum s;
    for (const auto& atom : atomic->atoms()) s += atom.weight * f(atom.point[0]);
    return s.value();
  }
  const auto& ray = std::get<RayDensity>(rho);
  const double d = ray.direction.at(0);
  return integrate([&](double x) { return ray.density(x) * f(x * d); }, ray.lo, ray.hi,
                   ray.breakpoints)
      .value;
}

}  // namespace

LimitReport small_time_limit(const LevyModel& model, const std::function<double(double)>& f,
                             std::uint64_t reps, std::uint64_t seed, const LimitOptions& opts) {
  const double mass = model.law.total_mass.value_or(0.0);
  if (model.rate > 0.0 && !model.law.total_mass)
    throw ModelError("small-time limit needs a finite jump measure");
  LimitReport report;
  report.rel_tol = opts.rel_tol;
  report.abs_tol = opts.abs_tol;
  const double intensity = model.rate * mass;
  for (std::size_t hi = 0; hi < opts.h_ladder.size(); ++hi) {
    const double h = opts.h_ladder[hi];
    if (!(h > 0.0)) throw ModelError("h ladder entries must be positive");
    const double mu = intensity * h;
    // strata k = 0..kmax of the jump count, tail below 1e-13
    std::vector<double> pk{std::exp(-mu)};
    double cum = pk[0];
    while (1.0 - cum > 1e-13 && pk.size() < 200) {
      pk.push_back(pk.back() * mu / static_cast<double>(pk.size()));
      cum += pk.back();
    }
    report.truncation_bound = std::max(report.truncation_bound, std::max(1.0 - cum, 0.0) / h);
    KahanSum mean;
    double var = 0.0;
    for (std::size_t k = 0; k < pk.size(); ++k) {
      if (pk[k] == 0.0) continue;
      const auto values = replicate<double>(reps, [&](std::uint64_t i) {
        Rng rng = Rng::stream(seed, hi * 1000 + k, i);
        double x = model.drift * h;
        if (model.sigma > 0.0) x += model.sigma * std::sqrt(h) * rng.normal();
        for (std::size_t j = 0; j < k; ++j) x += model.law.sample(rng);
        return f(x);
      });
      const auto est = estimate_mean(values);
      mean += pk[k] * est.mean;
      var += pk[k] * pk[k] * est.se * est.se;
    }
    report.h.push_back(h);
    report.estimate.push_back(mean.value() / h);
    report.se.push_back(std::sqrt(var) / h);
  }
  const auto ex = richardson(report.h, report.estimate, report.se);
  report.extrapolated = ex.value;
  report.extrapolated_se = ex.se;
  report.exponent = ex.exponent;
  if (model.rate > 0.0 && mass > 0.0) {
    if (!model.law.measure) throw ModelError("small-time oracle needs the jump measure");
    report.oracle = model.rate * integrate_against(*model.law.measure, f);
  }
  report.error = std::abs(report.extrapolated - report.oracle);
  report.pass = report.error <= std::max(opts.rel_tol * std::abs(report.oracle), opts.abs_tol);
  return report;
}

// ---- Dynkin -------------------------------------------------------------

namespace {

std::vector<double> sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

}  // namespace

DynkinReport verify_dynkin(const MarkovChainModel& chain, std::size_t anchor, double alpha,
                           const VectorFunctional& F, std::uint64_t reps, std::uint64_t seed,
                           const DynkinOptions& opts) {
  if (anchor >= chain.size()) throw ModelError("anchor state out of range");
  const double uaa = chain.U(static_cast<Eigen::Index>(anchor), static_cast<Eigen::Index>(anchor));
  if (!(uaa > 0.0)) throw ModelError("u(a, a) must be positive");
  const auto perm = make_permanental(chain.U, alpha, chain.states);
  const std::size_t lt_anchor = opts.local_time_anchor.value_or(anchor);
  const double scale = alpha * uaa;

  const auto fwd_lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const auto y = sample_permanental(perm, rng);
    const auto L = sample_local_times_tilde(chain, lt_anchor, rng, opts.clock);
    return F(sum(y, L));
  });
  const auto fwd_rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    const auto y = sample_permanental(perm, rng);
    return F(y) * y[anchor] / scale;
  });
  const auto conv_lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 2, i);
    return F(sample_permanental(perm, rng));
  });
  const auto conv_rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 3, i);
    const auto y = sample_permanental(perm, rng);
    const auto L = sample_local_times_tilde(chain, lt_anchor, rng, opts.clock);
    const double denom = y[anchor] + L[anchor];
    return denom > 0.0 ? scale * F(sum(y, L)) / denom : 0.0;
  });
  DynkinReport report;
  report.forward = compare_independent("dynkin", fwd_lhs, fwd_rhs, opts.z_crit);
  report.converse = compare_independent("dynkin_converse", conv_lhs, conv_rhs, opts.z_crit);
  return report;
}

// ---- size bias ----------------------------------------------------------

std::vector<double> sample_size_bias_translation(const SizeBiasModel& model, std::size_t k,
                                                 Rng& rng, bool drop_atom) {
  const double theta = model.theta.at(k);
  const double c = model.drift.empty() ? 0.0 : model.drift.at(k);
  const double u = rng.uniform();
  if (theta - c <= 0.0 || (!drop_atom && u < c / theta))
    return std::vector<double>(model.dimension(), 0.0);
  return model.sample_levy_part(k, rng);
}

IdentityReport verify_size_bias(const SizeBiasModel& model, std::size_t k,
                                const VectorFunctional& F, std::uint64_t reps,
                                std::uint64_t seed, bool drop_atom, const IsoOptions& opts) {
  if (k >= model.dimension()) throw ModelError("size-bias coordinate out of range");
  const double theta = model.theta[k];
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ModelError("size bias needs 0 < E Y_k < inf");
  const auto lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const auto y = model.sample(rng);
    const auto z = sample_size_bias_translation(model, k, rng, drop_atom);
    return F(sum(y, z));
  });
  const auto rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    const auto y = model.sample(rng);
    return F(y) * y[k] / theta * opts.rhs_weight_scale;
  });
  return compare_independent("size_bias", lhs, rhs, opts.z_crit);
}

SizeBiasModel gamma_size_bias_model(double alpha, double drift) {
  if (!(alpha >= 0.0) || !(drift >= 0.0)) throw ModelError("need alpha >= 0 and drift >= 0");
  SizeBiasModel m;
  m.sample = [alpha, drift](Rng& rng) {
    return std::vector<double>{drift + (alpha > 0.0 ? gamma(rng, alpha) : 0.0)};
  };
  m.theta = {drift + alpha};
  m.drift = {drift};
  // y nu(dy) / alpha = e^{-y} dy
  m.sample_levy_part = [](std::size_t, Rng& rng) {
    return std::vector<double>{rng.exponential()};
  };
  return m;
}

SizeBiasModel bivariate_gamma_size_bias_model(double alpha0, double alpha1, double alpha2) {
  if (!(alpha0 >= 0.0 && alpha1 >= 0.0 && alpha2 >= 0.0))
    throw ModelError("gamma shapes must be >= 0");
  SizeBiasModel m;
  m.sample = [=](Rng& rng) {
    auto draw = [&](double a) { return a > 0.0 ? gamma(rng, a) : 0.0; };
    const double g0 = draw(alpha0);
    const double g1 = draw(alpha1);
    const double g2 = draw(alpha2);
    return std::vector<double>{g1 + g0, g2 + g0};
  };
  m.theta = {alpha0 + alpha1, alpha0 + alpha2};
  m.drift = {0.0, 0.0};
  // nu = alpha1 e^{-y}/y on the first axis, alpha2 on the second,
  // alpha0 on the diagonal
  m.sample_levy_part = [=](std::size_t k, Rng& rng) {
    const double own = k == 0 ? alpha1 : alpha2;
    const double u = rng.uniform();
    const double e = rng.exponential();
    if (u * (own + alpha0) < own)
      return k == 0 ? std::vector<double>{e, 0.0} : std::vector<double>{0.0, e};
    return std::vector<double>{e, e};
  };
  return m;
}

MeanEstimate reconstruct_levy_mass(const SizeBiasModel& model,
                                   const std::function<bool(std::span<const double>)>& in_B,
                                   std::uint64_t reps, std::uint64_t seed) {
  const auto values = replicate<double>(reps, [&](std::uint64_t i) {
    double total = 0.0;
    for (std::size_t k = 0; k < model.dimension(); ++k) {
      Rng rng = Rng::stream(seed, k, i);
      const auto z = sample_size_bias_translation(model, k, rng);
      bool in_Ak = z[k] > 0.0;
      for (std::size_t j = 0; j < k && in_Ak; ++j) in_Ak = z[j] == 0.0;
      if (in_Ak && in_B(z)) total += model.theta[k] / z[k];
    }
    return total;
  });
  return estimate_mean(values);
}

MeanEstimate reconstruct_drift(const SizeBiasModel& model, std::size_t k, std::uint64_t reps,
                               std::uint64_t seed) {
  const auto values = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, k, i);
    const auto z = sample_size_bias_translation(model, k, rng);
    return z[k] == 0.0 ? model.theta[k] : 0.0;
  });
  return estimate_mean(values);
}

}  // namespace idsim
