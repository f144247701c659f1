#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "idsim/levy_representation.hpp"
#include "idsim/measure_core.hpp"
#include "idsim/rng.hpp"
#include "json.hpp"

namespace idsim {

// ---- Levy processes: S = [0, horizon] x R, n = lambda dr (x) rho --------

struct JumpPoint {
  double time = 0.0;  // r
  double size = 0.0;  // v
};

/// V_t(r, v) = 1{t >= r} v, closed at t = r.
inline double levy_kernel(double t, const JumpPoint& p) { return t >= p.time ? p.size : 0.0; }

/// Jump law rho together with the probability p ~ rho used to sample it.
struct JumpLaw {
  std::function<double(Rng&)> sample;        // draws from p
  std::function<double(double)> weight;       // dp/drho, > 0 on the support
  std::optional<double> total_mass;           // rho(R) when finite
  std::optional<LevyMeasure> measure;         // rho itself, for quadrature
};

/// rho = mass * delta_{size}.
JumpLaw point_jump_law(double size, double mass);
/// rho = finite atomic measure on the line, sampled proportionally.
JumpLaw atomic_jump_law(const AtomicMeasure& rho);

/// Representation on [0, horizon] x R with n1 = Uniform[0, horizon] (x) p,
/// so g(r, v) = weight(v) / (lambda * horizon).
LevyRepresentation<JumpPoint> levy_representation(double rate, double horizon, JumpLaw law);

// ---- compound Poisson ---------------------------------------------------

/// Y_t = sum_{n <= zeta} V^(n)_t with zeta ~ Poisson(theta); the sampler
/// writes one kernel path V on the grid.
using KernelPathSampler = std::function<void(Rng&, std::span<const double>, std::span<double>)>;
SamplePath compound_poisson_sample(const KernelPathSampler& sample_kernel, double theta,
                                   std::span<const double> grid, Rng& rng);

// ---- Brownian excursions ------------------------------------------------

/// A positive excursion of length R on m equally spaced points over [0, R].
struct ExcursionPoint {
  double length = 0.0;
  std::vector<double> path;

  std::size_t size() const { return path.size(); }
  double spacing() const { return length / static_cast<double>(path.size() - 1); }
};

/// Tilt f of the excursion length: n1 = f(R) n+. The density of R under n1
/// is f(x) x^{-3/2} / (2 sqrt(2 pi)).
struct LengthTilt {
  std::function<double(double)> f;
  /// sup f / f_std for the rejection sampler (1 for the standard tilt).
  double envelope_bound = 1.0;
  bool standard = false;

  /// f(x) = sqrt(pi/2) (x ^ 1).
  static LengthTilt standard_tilt();
  /// Checks the normalization by quadrature (throws ModelError if off by
  /// more than 1e-6) and returns the tilt.
  static LengthTilt custom(std::function<double(double)> f, double envelope_bound);
};

/// Draws R from the tilted length law. Standard tilt: with probability 1/2
/// R = U^2, else R = U^{-2}. Others by rejection from the standard tilt.
double sample_excursion_length(const LengthTilt& tilt, Rng& rng);

/// Unit-length excursion on m points via the Vervaat transform of a
/// discretized Brownian bridge. Throws ModelError for m < 3.
std::vector<double> normalized_excursion(std::size_t m, Rng& rng);

/// R from the tilt, path(t) = sqrt(R) e(t / R).
ExcursionPoint sample_excursion(const LengthTilt& tilt, std::size_t m, Rng& rng);

/// Occupation-density estimate of L^a: the exact time the piecewise-linear
/// path spends in (a - eps, a + eps), divided by 2 eps. Zero for a <= 0.
double local_time(const ExcursionPoint& exc, double level, double eps);
void local_times(const ExcursionPoint& exc, std::span<const double> levels, double eps,
                 std::span<double> out);

/// Local times above this multiple of sqrt(R) are taken as 0 (the excursion
/// height exceeds it with probability below 1e-28).
inline constexpr double kExcursionHeightCutoff = 6.0;

/// Bandwidth eps = scale * sqrt(R) * m^{-exponent}.
struct LocalTimeConfig {
  double scale = 1.0;
  double exponent = 0.25;

  double bandwidth(double length, std::size_t m) const;
};

/// Grid size per excursion: m_max * sqrt(R ^ 1), clamped to [m_min, m_max].
struct ExcursionGrid {
  std::size_t m_min = 64;
  std::size_t m_max = 10000;

  std::size_t points_for(double length) const;
};

/// Excursion stored as (R, seed); the path is generated on demand, so
/// points that never need a local time stay cheap.
struct LazyExcursion {
  double length = 0.0;
  std::uint64_t seed = 0;

  ExcursionPoint materialize(const ExcursionGrid& grid) const;
};

LazyExcursion sample_lazy_excursion(const LengthTilt& tilt, Rng& rng);

/// Local times of a lazy excursion at several levels. Levels whose band
/// lies above 6 sqrt(R) are reported as 0 without building the path: the
/// normalized excursion exceeds 6 with probability below 1e-28.
void excursion_local_times(const LazyExcursion& exc, std::span<const double> levels,
                           const ExcursionGrid& grid, const LocalTimeConfig& lt,
                           std::span<double> out);

struct BesqPoint {
  double birth = 0.0;  // r
  LazyExcursion excursion;
};

/// L^{t - r}(u).
double besq_kernel(double t, const BesqPoint& p, const ExcursionGrid& grid,
                   const LocalTimeConfig& lt);
/// L^{sigma^2 t / 4}(u).
double feller_kernel(double t, const LazyExcursion& u, double sigma, const ExcursionGrid& grid,
                     const LocalTimeConfig& lt);

/// (U+, a n+) with g = f(R) / a.
LevyRepresentation<LazyExcursion> feller_representation(double a, double sigma, LengthTilt tilt,
                                                        ExcursionGrid grid = {},
                                                        LocalTimeConfig lt = {});
/// (R+ x U+, beta dr (x) n+) with g = e^{-beta r} f(R).
LevyRepresentation<BesqPoint> besq_representation(double beta, LengthTilt tilt,
                                                  ExcursionGrid grid = {},
                                                  LocalTimeConfig lt = {});

// ---- finite Markov chains and permanental vectors -----------------------

/// Substochastic transition matrix on a finite state list; the row
/// deficiency is the killing probability. Green matrix U = (I - P)^{-1}.
struct MarkovChainModel {
  std::vector<std::string> states;
  Eigen::MatrixXd P;
  Eigen::MatrixXd U;

  std::size_t size() const { return states.size(); }
  std::size_t index_of(const std::string& state) const;
};

/// Throws ModelError unless P is square, nonnegative, substochastic and
/// transient (spectral radius < 1).
Eigen::MatrixXd green_matrix(const Eigen::MatrixXd& P);
MarkovChainModel make_chain(std::vector<std::string> states, Eigen::MatrixXd P);

/// Visit counts of the discrete chain started at `start` until killing.
std::vector<double> sample_visit_counts(const MarkovChainModel& chain, std::size_t start,
                                        Rng& rng);

/// How a visit contributes to the local time.
enum class LocalTimeClock {
  Continuous,  // unit-rate chain: each visit adds an Exp(1) holding time
  VisitCount,  // discrete chain: each visit adds 1
};

/// Local times under the law started at a and killed at its last visit to
/// a: the unconditioned trajectory is truncated after its last visit to a
/// (the final holding time at a included).
std::vector<double> sample_local_times_tilde(const MarkovChainModel& chain, std::size_t anchor,
                                             Rng& rng,
                                             LocalTimeClock clock = LocalTimeClock::Continuous);

/// Permanental vector with kernel U and index alpha = k / 2.
struct PermanentalModel {
  std::vector<std::string> states;
  Eigen::MatrixXd U;
  double alpha = 0.5;
  Eigen::MatrixXd cholesky;  // lower factor of U

  std::size_t size() const { return static_cast<std::size_t>(U.rows()); }
};

/// Throws ModelError unless U is symmetric positive definite and 2 alpha is
/// a positive integer.
PermanentalModel make_permanental(Eigen::MatrixXd U, double alpha,
                                  std::vector<std::string> states = {});

/// Y = 1/2 sum_{i <= 2 alpha} eta_i^2 with eta_i iid N(0, U).
std::vector<double> sample_permanental(const PermanentalModel& model, Rng& rng);

/// |I + U S|^{-alpha} for S = diag(s).
double permanental_laplace(const Eigen::MatrixXd& U, double alpha, std::span<const double> s);

/// {states, P} for chains.
MarkovChainModel chain_from_json(const nlohmann::json& doc);
/// {states?, U} or {states, P} (U from the Green matrix), plus alpha.
PermanentalModel permanental_from_json(const nlohmann::json& doc);

}  // namespace idsim
