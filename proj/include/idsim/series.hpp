#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "idsim/errors.hpp"
#include "idsim/levy_representation.hpp"
#include "idsim/measure_core.hpp"
#include "idsim/prm.hpp"
#include "idsim/representations.hpp"
#include "idsim/rng.hpp"

namespace idsim {

// Shot-noise series sum_j V(xi_j) 1{g(xi_j) <= 1/Gamma_j}, truncated at a
// Gamma budget.

enum class Centering {
  None,     // uncentered series plus b(t) - c(t)
  PerTerm,  // each term minus c_j(t)
};

/// Memoized C_J(t) = int [[V_t]] (J g ^ 1) dn, so that
/// c_j(t) = C_j(t) - C_{j-1}(t) and sum_{j <= J} c_j(t) = C_J(t).
class CenteringCache {
 public:
  using Cumulative = std::function<double(std::uint64_t, double)>;

  explicit CenteringCache(Cumulative cumulative) : cumulative_(std::move(cumulative)) {}

  double cumulative(std::uint64_t J, double t);

 private:
  Cumulative cumulative_;
  std::map<std::pair<std::uint64_t, double>, double> values_;
  std::mutex mutex_;
};

template <class Point>
struct SeriesConfig {
  LevyRepresentation<Point> rep;
  double tau = 1000.0;
  std::vector<double> grid;
  Centering centering = Centering::None;
  /// b(t); defaults to 0.
  std::function<double(double)> shift;
  /// c(t) subtracted in the uncentered form; defaults to 0.
  std::function<double(double)> limit_centering;
  /// Required for per-term centering.
  std::shared_ptr<CenteringCache> centering_cache;
  /// Draws the points the ladder would retain beyond tau (a PRM with
  /// intensity (1 - tau g)^+ n) and adds their kernels on the grid.
  std::function<void(Rng&, std::span<const double>, std::span<double>)> tail;

  void validate() const {
    if (!(tau > 0.0)) throw ModelError("gamma budget must be positive");
    if (grid.empty()) throw ModelError("series time grid is empty");
    if (centering == Centering::PerTerm && !centering_cache)
      throw ModelError("per-term centering needs a centering integral");
  }
};

struct SeriesRealization {
  SamplePath path;
  std::uint64_t terms_used = 0;  // retained terms
  std::uint64_t arrivals = 0;    // Gamma_j <= tau
  double discarded_mass = 0.0;   // n-mass of the window beyond tau (inf if unknown)
};

/// c_j(t) of the per-term centering.
template <class Point>
double centering_term(const SeriesConfig<Point>& cfg, std::uint64_t j, double t) {
  if (!cfg.centering_cache) throw ModelError("series has no centering integral");
  if (j == 0) return 0.0;
  return cfg.centering_cache->cumulative(j, t) - cfg.centering_cache->cumulative(j - 1, t);
}

struct NoVisit {
  template <class Point>
  void operator()(const Point&, double, bool) const {}
};

/// One truncated series path. visit(point, Gamma, retained) sees every
/// arrival in ladder order (used to accumulate weights on the same ladder).
template <class Point, class Visit = NoVisit>
SeriesRealization generate_series(const SeriesConfig<Point>& cfg, Rng& rng, Visit&& visit = {}) {
  cfg.validate();
  SeriesRealization out;
  out.path = SamplePath(cfg.grid);
  out.discarded_mass = cfg.rep.discarded(cfg.tau);
  const std::size_t n = cfg.grid.size();
  std::vector<double> v(n);
  std::vector<double> acc(n, 0.0);
  double gamma = rng.exponential();
  while (gamma <= cfg.tau) {
    Point s = cfg.rep.sample(rng);
    ++out.arrivals;
    const bool keep = is_retained(cfg.rep, s, gamma);
    if (keep) {
      ++out.terms_used;
      cfg.rep.evaluate(s, cfg.grid, v);
      for (std::size_t i = 0; i < n; ++i) acc[i] += v[i];
    }
    visit(s, gamma, keep);
    gamma += rng.exponential();
  }
  if (cfg.tail) cfg.tail(rng, cfg.grid, acc);
  if (out.terms_used == 0 && std::isinf(out.discarded_mass) && !cfg.tail)
    throw BudgetError("gamma budget retained no term and the discarded window is unbounded");
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cfg.grid[i];
    double value = acc[i];
    if (cfg.shift) value += cfg.shift(t);
    if (cfg.centering == Centering::PerTerm) {
      value -= cfg.centering_cache->cumulative(out.arrivals, t);
    } else if (cfg.limit_centering) {
      value -= cfg.limit_centering(t);
    }
    out.path.values[i] = value;
  }
  return out;
}

// ---- instantiations -----------------------------------------------------

/// Bandwidth used by the excursion series unless the caller overrides it.
inline constexpr LocalTimeConfig kSeriesLocalTime{1.0, 0.5};

/// n+-integral of (1 - tau w f(R))^+ L^x over excursions, for the standard
/// tilt f. Uses E[L^x | R] = 4x exp(-2x^2 / R).
double excursion_remainder(double level, double tau_w);

/// Excursion lengths below this are left out of the tail draw of the BESQ
/// series; their expected contribution is below 2 n+(R^{1/2}; R < floor).
inline constexpr double kTailLengthFloor = 1e-14;

/// Feller diffusion dZ = sigma sqrt(Z) dW, Z_0 = a: local times at level
/// sigma^2 t / 4 of excursions drawn from f(R) n+, retained when
/// f(R) <= a / Gamma. The value at t = 0 is the initial value a.
/// With the standard tilt and sample_tail set, the points beyond the budget
/// are drawn directly (only those with a nonzero local time on the grid).
SeriesConfig<LazyExcursion> feller_config(double a, double sigma, const LengthTilt& tilt,
                                          double tau, std::vector<double> grid,
                                          ExcursionGrid egrid = {},
                                          LocalTimeConfig lt = kSeriesLocalTime,
                                          bool sample_tail = true);
SeriesRealization feller_series(double a, double sigma, const LengthTilt& tilt, double tau,
                                std::vector<double> grid, Rng& rng, ExcursionGrid egrid = {},
                                LocalTimeConfig lt = kSeriesLocalTime, bool sample_tail = true);

/// BESQ of dimension beta from 0: points (eta, xi), eta ~ Exp(beta),
/// g = e^{-beta eta} f(R), kernel L^{t - eta}(xi).
SeriesConfig<BesqPoint> besq_config(double beta, double tau, std::vector<double> grid,
                                    const LengthTilt& tilt = LengthTilt::standard_tilt(),
                                    ExcursionGrid egrid = {},
                                    LocalTimeConfig lt = kSeriesLocalTime,
                                    bool sample_tail = true);
SeriesRealization besq_series(double beta, double tau, std::vector<double> grid, Rng& rng,
                              const LengthTilt& tilt = LengthTilt::standard_tilt(),
                              ExcursionGrid egrid = {}, LocalTimeConfig lt = kSeriesLocalTime,
                              bool sample_tail = true);

/// Levy process on [0, horizon] with jump intensity rate * rho and shift b.
struct LevySeriesModel {
  double rate = 1.0;
  double horizon = 1.0;
  JumpLaw law;
  std::function<double(double)> shift;
  CutoffFunction chi;
};

/// Per-term centering when rho charges both half-lines, none otherwise.
SeriesConfig<JumpPoint> levy_config(const LevySeriesModel& model, double tau,
                                    std::vector<double> grid);
SeriesRealization levy_series(const LevySeriesModel& model, double tau, std::vector<double> grid,
                              Rng& rng);

/// C_J(t) for the Levy kernel: rate (t ^ horizon) int [[v]] (J g(v) ^ 1) rho(dv),
/// with g(v) = weight(v) / (rate horizon).
double levy_cumulative_centering(const LevySeriesModel& model, std::uint64_t J, double t);

}  // namespace idsim
