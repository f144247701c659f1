#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idsim/errors.hpp"
#include "idsim/levy_representation.hpp"
#include "idsim/parallel.hpp"
#include "idsim/prm.hpp"
#include "idsim/representations.hpp"
#include "idsim/rng.hpp"
#include "idsim/series.hpp"
#include "idsim/stats.hpp"

namespace idsim {

// Monte Carlo verification of isomorphism identities E F(X + Z) = E[F(X) W].
// Arms use independent streams (seed, arm, replication) unless noted.

using PathFunctional = std::function<double(const SamplePath&)>;
using VectorFunctional = std::function<double(std::span<const double>)>;

struct IsoOptions {
  double z_crit = 4.0;
  /// Negative control: multiplies the weight on the right-hand side only.
  double rhs_weight_scale = 1.0;
  /// Probes for the MC check of int q dn = 1 (0 disables the check).
  std::uint64_t normalization_probes = 100000;
};

/// X_t = G_t + sum_{s in N} V_t(s) + drift(t) on a grid, N a PRM with
/// intensity n. Finite-mass representations are sampled directly; others
/// through the strip construction with budget tau (uncentered, so the
/// kernel must satisfy int |V_t| ^ 1 dn < inf).
template <class Point>
struct ProcessModel {
  LevyRepresentation<Point> rep;
  std::vector<double> grid;
  std::function<double(double)> drift;
  std::function<void(Rng&, std::span<const double>, std::span<double>)> gaussian;
  double tau = 1000.0;
};

template <class Point>
struct ProcessDraw {
  SamplePath path;
  PointConfiguration<Point> points;
};

template <class Point>
ProcessDraw<Point> draw_process(const ProcessModel<Point>& model, Rng& rng) {
  ProcessDraw<Point> d;
  d.path = SamplePath(model.grid);
  if (model.rep.finite_mass) {
    d.points = sample_prm_finite(model.rep, rng);
  } else {
    d.points = retained_points(model.rep, sample_prm_thinned(model.rep, model.tau, rng));
  }
  const std::size_t n = model.grid.size();
  std::vector<double> v(n);
  for (const auto& e : d.points.points) {
    model.rep.evaluate(e.point, model.grid, v);
    for (std::size_t i = 0; i < n; ++i) d.path.values[i] += v[i];
  }
  if (model.drift)
    for (std::size_t i = 0; i < n; ++i) d.path.values[i] += model.drift(model.grid[i]);
  if (model.gaussian) {
    model.gaussian(rng, model.grid, v);
    for (std::size_t i = 0; i < n; ++i) d.path.values[i] += v[i];
  }
  return d;
}

/// MC estimate of int q dn = E_{n1}[q / g]. Throws ModelError when it is
/// further than 1e-2 + 4 SE from `target`.
template <class Point, class Q>
MeanEstimate check_q_normalization(const LevyRepresentation<Point>& rep, Q&& q,
                                   std::uint64_t probes, std::uint64_t seed, double target = 1.0) {
  const auto w = replicate<double>(probes, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 7, i);
    const Point s = rep.sample(rng);
    return q(s) / rep.density(s);
  });
  const auto est = estimate_mean(w);
  if (probes > 0 && std::abs(est.mean - target) > 1e-2 + 4.0 * est.se)
    throw ModelError("q is not normalized: int q dn estimated at " + std::to_string(est.mean) +
                     " (target " + std::to_string(target) + ")");
  return est;
}

namespace detail {

template <class Point>
void add_kernel(const LevyRepresentation<Point>& rep, const Point& s, SamplePath& path) {
  std::vector<double> v(path.size());
  rep.evaluate(s, path.times, v);
  for (std::size_t i = 0; i < path.size(); ++i) path.values[i] += v[i];
}

}  // namespace detail

/// int E F(X + V(s)) q(s) n(ds) = E[F(X) N(q)].
/// LHS: s ~ n1 with weight q/g, X independent. RHS: F(X) N(q).
template <class Point, class Q>
IdentityReport verify_iso2(const ProcessModel<Point>& model, Q&& q, const PathFunctional& F,
                           std::uint64_t reps, std::uint64_t seed, const IsoOptions& opts = {}) {
  if (opts.normalization_probes > 0)
    check_q_normalization(model.rep, q, opts.normalization_probes, seed);
  const auto lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const Point s = model.rep.sample(rng);
    const double w = q(s) / model.rep.density(s);
    auto d = draw_process(model, rng);
    if (w == 0.0) return 0.0;
    detail::add_kernel(model.rep, s, d.path);
    return F(d.path) * w;
  });
  const auto rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    const auto d = draw_process(model, rng);
    return F(d.path) * N_of_q(d.points, q) * opts.rhs_weight_scale;
  });
  return compare_independent("iso2", lhs, rhs, opts.z_crit);
}

/// E[F(X); N(q) > 0] = int E[F(X + V(s)) / (N(q) + q(s))] q(s) n(ds).
/// When positive_mass = n{q > 0} is finite the report also carries the
/// empirical P(N(q) > 0) against 1 - exp(-positive_mass).
template <class Point, class Q>
IdentityReport verify_iso3_iso4(const ProcessModel<Point>& model, Q&& q, const PathFunctional& F,
                                std::uint64_t reps, std::uint64_t seed,
                                std::optional<double> positive_mass = std::nullopt,
                                const IsoOptions& opts = {}) {
  if (opts.normalization_probes > 0)
    check_q_normalization(model.rep, q, opts.normalization_probes, seed);
  std::vector<double> positive(reps);
  const auto lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const auto d = draw_process(model, rng);
    const bool pos = N_of_q(d.points, q) > 0.0;
    positive[i] = pos ? 1.0 : 0.0;
    return pos ? F(d.path) : 0.0;
  });
  const auto rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    const Point s = model.rep.sample(rng);
    const double qs = q(s);
    if (qs == 0.0) return 0.0;
    const double w = qs / model.rep.density(s);
    auto d = draw_process(model, rng);
    const double nq = N_of_q(d.points, q);
    detail::add_kernel(model.rep, s, d.path);
    return F(d.path) * w / (nq + qs) * opts.rhs_weight_scale;
  });
  auto report = compare_independent("iso3", lhs, rhs, opts.z_crit);
  const auto p = estimate_mean(positive);
  report.extras["p_positive"] = p.mean;
  report.extras["p_positive_se"] = p.se;
  if (positive_mass) {
    const double oracle = 1.0 - std::exp(-*positive_mass);
    report.extras["p_positive_oracle"] = oracle;
    report.extras["p_positive_z"] = z_statistic(p.mean, p.se, oracle, 0.0);
  }
  return report;
}

/// Translation law q(0) delta_0 + q n:
/// E F(X + Z) = E[F(X) (N(q) + q(0))].
/// With drop_atom the q(0) term is left out of the right-hand side.
template <class Point, class Q>
IdentityReport verify_iso1_atom(const ProcessModel<Point>& model, Q&& q, double atom_weight,
                                const PathFunctional& F, std::uint64_t reps, std::uint64_t seed,
                                bool drop_atom = false, const IsoOptions& opts = {}) {
  if (!(atom_weight >= 0.0 && atom_weight <= 1.0))
    throw ModelError("atom weight must lie in [0, 1]");
  if (opts.normalization_probes > 0)
    check_q_normalization(model.rep, q, opts.normalization_probes, seed, 1.0 - atom_weight);
  const auto lhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const Point s = model.rep.sample(rng);
    const double w = q(s) / model.rep.density(s);
    auto d = draw_process(model, rng);
    double value = atom_weight > 0.0 ? atom_weight * F(d.path) : 0.0;
    if (w != 0.0) {
      detail::add_kernel(model.rep, s, d.path);
      value += F(d.path) * w;
    }
    return value;
  });
  const auto rhs = replicate<double>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    const auto d = draw_process(model, rng);
    const double weight = N_of_q(d.points, q) + (drop_atom ? 0.0 : atom_weight);
    return F(d.path) * weight * opts.rhs_weight_scale;
  });
  return compare_independent("iso1_atom", lhs, rhs, opts.z_crit);
}

/// Series form on one Gamma ladder:
/// E F(V(xi0) + Y) = E[F(Y) Q], Q = sum_j q(xi_j) 1{retained}.
/// xi0 is drawn from q n by importance weighting from n1. The converse
/// E[F(Y); Q > 0] = E[F(V(xi0) + Y) / (Q + q(xi0))] is reported in extras.
template <class Point, class Q>
IdentityReport verify_series_iso(const SeriesConfig<Point>& cfg, Q&& q, const PathFunctional& F,
                                 std::uint64_t reps, std::uint64_t seed,
                                 const IsoOptions& opts = {}) {
  cfg.validate();
  if (opts.normalization_probes > 0)
    check_q_normalization(cfg.rep, q, opts.normalization_probes, seed);
  struct Row {
    double value = 0.0;      // forward
    double converse = 0.0;
  };
  // LHS: fresh series path plus one extra term at xi0.
  const auto lhs = replicate<Row>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 0, i);
    const Point s = cfg.rep.sample(rng);
    const double qs = q(s);
    const double w = qs / cfg.rep.density(s);
    double Qsum = 0.0;
    auto r = generate_series(cfg, rng, [&](const Point& p, double, bool keep) {
      if (keep) Qsum += q(p);
    });
    Row row;
    if (w == 0.0) return row;
    detail::add_kernel(cfg.rep, s, r.path);
    const double f = F(r.path);
    row.value = f * w;
    row.converse = f * w / (Qsum + qs);
    return row;
  });
  // RHS: F(Y) Q with Q accumulated on the ladder that built Y.
  const auto rhs = replicate<Row>(reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(seed, 1, i);
    double Qsum = 0.0;
    const auto r = generate_series(cfg, rng, [&](const Point& p, double, bool keep) {
      if (keep) Qsum += q(p);
    });
    const double f = F(r.path);
    Row row;
    row.value = f * Qsum * opts.rhs_weight_scale;
    row.converse = Qsum > 0.0 ? f : 0.0;
    return row;
  });
  std::vector<double> l(reps), h(reps), lc(reps), hc(reps);
  for (std::uint64_t i = 0; i < reps; ++i) {
    l[i] = lhs[i].value;
    h[i] = rhs[i].value;
    lc[i] = rhs[i].converse;  // E[F(Y); Q > 0]
    hc[i] = lhs[i].converse;
  }
  auto report = compare_independent("series_iso", l, h, opts.z_crit);
  const auto converse = compare_independent("series_iso_converse", lc, hc, opts.z_crit);
  report.extras["converse_lhs"] = converse.lhs_mean;
  report.extras["converse_lhs_se"] = converse.lhs_se;
  report.extras["converse_rhs"] = converse.rhs_mean;
  report.extras["converse_rhs_se"] = converse.rhs_se;
  report.extras["converse_z"] = converse.z;
  report.pass = report.pass && converse.pass;
  return report;
}

// ---- Levy processes -----------------------------------------------------

/// X_t = sigma B_t + (compound Poisson with intensity rate * rho) + drift t
/// on [0, horizon]. rho must have finite mass; drift is the net linear
/// coefficient after any compensation.
struct LevyModel {
  double sigma = 0.0;
  double drift = 0.0;
  double rate = 1.0;
  JumpLaw law;
  double horizon = 1.0;
};

ProcessModel<JumpPoint> levy_process_model(const LevyModel& model, std::vector<double> grid);

/// int E F(X + 1{r <= .} v) q(r, v) dr (rate rho)(dv) = E[F(X) sum_jumps q(r, dX_r)].
IdentityReport verify_levy_translation(const LevyModel& model,
                                       const std::function<double(double, double)>& q,
                                       const PathFunctional& F, std::vector<double> grid,
                                       std::uint64_t reps, std::uint64_t seed,
                                       const IsoOptions& opts = {});

struct LimitReport {
  std::vector<double> h;
  std::vector<double> estimate;  // h^{-1} E f(X_h)
  std::vector<double> se;
  double extrapolated = 0.0;
  double extrapolated_se = 0.0;
  double exponent = 1.0;  // fitted error exponent
  double oracle = 0.0;    // int f d(rate rho)
  double error = 0.0;     // |extrapolated - oracle|
  double truncation_bound = 0.0;
  double rel_tol = 0.05;
  double abs_tol = 0.01;
  bool pass = false;
};

struct LimitOptions {
  std::vector<double> h_ladder{1e-1, 1e-2, 1e-3, 1e-4};
  double rel_tol = 0.05;  // pass if error <= max(rel_tol |oracle|, abs_tol)
  double abs_tol = 0.01;
};

/// h^{-1} E f(X_h) along the ladder (stratified on the number of jumps),
/// Richardson-extrapolated to h = 0 and compared with int f d(rate rho).
LimitReport small_time_limit(const LevyModel& model, const std::function<double(double)>& f,
                             std::uint64_t reps, std::uint64_t seed,
                             const LimitOptions& opts = {});

/// Extrapolation of e(h) = L + C h^p from the last three ladder points, p
/// fitted on [0.25, 4]; falls back to p = 1 when the fit is degenerate.
struct Extrapolation {
  double value = 0.0;
  double se = 0.0;
  double exponent = 1.0;
};
Extrapolation richardson(std::span<const double> h, std::span<const double> e,
                         std::span<const double> se);

// ---- Dynkin isomorphism -------------------------------------------------

struct DynkinOptions {
  double z_crit = 4.0;
  LocalTimeClock clock = LocalTimeClock::Continuous;
  /// Negative control: local times anchored elsewhere than the weight.
  std::optional<std::size_t> local_time_anchor;
};

struct DynkinReport {
  IdentityReport forward;   // E F(Y + L) = E[F(Y) Y_a / (alpha u(a,a))]
  IdentityReport converse;  // E F(Y) = alpha u(a,a) E[F(Y + L) / (Y_a + L_a)]
};

DynkinReport verify_dynkin(const MarkovChainModel& chain, std::size_t anchor, double alpha,
                           const VectorFunctional& F, std::uint64_t reps, std::uint64_t seed,
                           const DynkinOptions& opts = {});

// ---- size bias ----------------------------------------------------------

/// Nonnegative ID vector with finite means theta, drift c and the
/// normalized size-biased Levy parts y_k nu(dy) / (theta_k - c_k).
struct SizeBiasModel {
  std::function<std::vector<double>(Rng&)> sample;
  std::vector<double> theta;
  std::vector<double> drift;
  /// Draws from y_k nu(dy) / (theta_k - c_k).
  std::function<std::vector<double>(std::size_t, Rng&)> sample_levy_part;

  std::size_t dimension() const { return theta.size(); }
};

/// Z^k: 0 with probability c_k / theta_k, else the size-biased Levy part.
std::vector<double> sample_size_bias_translation(const SizeBiasModel& model, std::size_t k,
                                                 Rng& rng, bool drop_atom = false);

/// E F(Y + Z^k) = E[F(Y) Y_k / theta_k].
IdentityReport verify_size_bias(const SizeBiasModel& model, std::size_t k,
                                const VectorFunctional& F, std::uint64_t reps,
                                std::uint64_t seed, bool drop_atom = false,
                                const IsoOptions& opts = {});

/// Y = c + Gamma(alpha, 1).
SizeBiasModel gamma_size_bias_model(double alpha, double drift = 0.0);
/// Y = (G1 + G0, G2 + G0) with independent G_i ~ Gamma(alpha_i, 1).
SizeBiasModel bivariate_gamma_size_bias_model(double alpha0, double alpha1, double alpha2);

/// Levy measure of a set B rebuilt from the translations:
/// nu(B) = sum_k theta_k E[1_{A_k}(Z^k) 1_B(Z^k) / Z^k_k],
/// A_k = {y_1 = ... = y_{k-1} = 0, y_k > 0}.
MeanEstimate reconstruct_levy_mass(const SizeBiasModel& model,
                                   const std::function<bool(std::span<const double>)>& in_B,
                                   std::uint64_t reps, std::uint64_t seed);
/// c_k = theta_k P(Z^k_k = 0).
MeanEstimate reconstruct_drift(const SizeBiasModel& model, std::size_t k, std::uint64_t reps,
                               std::uint64_t seed);

}  // namespace idsim
