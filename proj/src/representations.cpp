#include "idsim/representations.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "idsim/errors.hpp"
#include "idsim/quadrature.hpp"

namespace idsim {

namespace {


double standard_f(double x) { return std::sqrt(std::numbers::pi / 2.0) * std::min(x, 1.0); }

}  // namespace

// ---- Levy processes -----------------------------------------------------

JumpLaw point_jump_law(double size, double mass) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw ModelError("jump mass must be finite and >= 0");
  JumpLaw law;
  law.sample = [size](Rng&) { return size; };
  law.weight = [mass](double) { return 1.0 / mass; };
  law.total_mass = mass;
  AtomicMeasure rho(FiniteIndexSet::range(1));
  if (mass > 0.0) rho.add({size}, mass);
  law.measure = rho;
  return law;
}

JumpLaw atomic_jump_law(const AtomicMeasure& rho) {
  if (rho.index_set().dimension() != 1) throw ModelError("jump law must live on the line");
  const AtomicMeasure merged = rho.normalized();
  const double mass = merged.total_mass();
  std::vector<double> sizes, cumulative;
  double acc = 0.0;
  for (const auto& atom : merged.atoms()) {
    acc += atom.weight;
    sizes.push_back(atom.point[0]);
    cumulative.push_back(acc);
  }
  JumpLaw law;
  law.sample = [sizes, cumulative, mass](Rng& rng) {
    const double u = rng.uniform() * mass;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                         sizes.size() - 1);
    return sizes[k];
  };
  law.weight = [mass](double) { return 1.0 / mass; };
  law.total_mass = mass;
  law.measure = merged;
  return law;
}

LevyRepresentation<JumpPoint> levy_representation(double rate, double horizon, JumpLaw law) {
  if (!(rate >= 0.0) || !(horizon > 0.0)) throw ModelError("need rate >= 0 and horizon > 0");
  LevyRepresentation<JumpPoint> rep;
  rep.sample = [horizon, sampler = law.sample](Rng& rng) {
    JumpPoint p;
    p.time = horizon * rng.uniform();
    p.size = sampler(rng);
    return p;
  };
  rep.density = [scale = rate * horizon, weight = law.weight](const JumpPoint& p) {
    return weight(p.size) / scale;
  };
  rep.kernel = [](double t, const JumpPoint& p) { return levy_kernel(t, p); };
  if (law.total_mass) {
    const double theta = rate * horizon * *law.total_mass;
    rep.finite_mass = theta;
    rep.discarded_mass = [theta](double tau) { return std::max(theta - tau, 0.0); };
  }
  return rep;
}

// ---- compound Poisson ---------------------------------------------------

SamplePath compound_poisson_sample(const KernelPathSampler& sample_kernel, double theta,
                                   std::span<const double> grid, Rng& rng) {
  if (!(theta >= 0.0)) throw ModelError("compound Poisson intensity must be >= 0");
  SamplePath path(std::vector<double>(grid.begin(), grid.end()));
  const auto count = poisson(rng, theta);
  std::vector<double> v(grid.size());
  for (std::uint64_t n = 0; n < count; ++n) {
    sample_kernel(rng, grid, v);
    for (std::size_t i = 0; i < grid.size(); ++i) path.values[i] += v[i];
  }
  return path;
}

// ---- excursions ---------------------------------------------------------

LengthTilt LengthTilt::standard_tilt() {
  LengthTilt t;
  t.f = standard_f;
  t.envelope_bound = 1.0;
  t.standard = true;
  return t;
}

LengthTilt LengthTilt::custom(std::function<double(double)> f, double envelope_bound) {
  if (!(envelope_bound > 0.0)) throw ModelError("envelope bound must be positive");
  const double c = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  // x = u^2 on [0, 1] tames the x^{-1/2} behaviour of tilts vanishing at 0;
  // values that overflow next to the endpoint carry no mass
  auto finite_or_zero = [](double v) { return std::isfinite(v) ? v : 0.0; };
  auto near = [&](double u) { return u > 0.0 ? finite_or_zero(2.0 * c * f(u * u) / (u * u)) : 0.0; };
  auto far = [&](double x) { return c * f(x) * std::pow(x, -1.5); };
  boost::math::quadrature::tanh_sinh<double> near_zero;
  boost::math::quadrature::exp_sinh<double> tail;
  const double mass = near_zero.integrate(near, 0.0, 1.0) + tail.integrate(far, 1.0, INFINITY);
  if (!std::isfinite(mass)) throw ModelError("length tilt normalization is not finite");
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "length tilt is not normalized: mass " << mass;
    throw ModelError(msg.str());
  }
  LengthTilt t;
  t.f = std::move(f);
  t.envelope_bound = envelope_bound;
  return t;
}

namespace {

double sample_standard_length(Rng& rng) {
  const double half = rng.uniform();
  const double u = rng.uniform();
  return half < 0.5 ? u * u : 1.0 / (u * u);
}

}  // namespace

double sample_excursion_length(const LengthTilt& tilt, Rng& rng) {
  if (tilt.standard) return sample_standard_length(rng);
  for (;;) {
    const double r = sample_standard_length(rng);
    const double ratio = tilt.f(r) / (tilt.envelope_bound * standard_f(r));
    if (ratio > 1.0 + 1e-12) throw ModelError("length tilt exceeds its envelope bound");
    if (rng.uniform() < ratio) return r;
  }
}

std::vector<double> normalized_excursion(std::size_t m, Rng& rng) {
  if (m < 3) throw ModelError("an excursion needs at least 3 grid points");
  const std::size_t n = m - 1;
  const double sd = std::sqrt(1.0 / static_cast<double>(n));
  std::vector<double> walk(m, 0.0);
  for (std::size_t k = 1; k <= n; ++k) walk[k] = walk[k - 1] + sd * rng.normal();
  // bridge
  const double end = walk[n];
  for (std::size_t k = 0; k <= n; ++k)
    walk[k] -= end * static_cast<double>(k) / static_cast<double>(n);
  // Vervaat: rotate at the argmin of the cyclic bridge
  const auto kmin = static_cast<std::size_t>(
      std::min_element(walk.begin(), walk.begin() + static_cast<std::ptrdiff_t>(n)) - walk.begin());
  std::vector<double> e(m);
  const double base = walk[kmin];
  for (std::size_t j = 0; j < n; ++j) e[j] = walk[(kmin + j) % n] - base;
  e[0] = 0.0;
  e[n] = 0.0;
  return e;
}

ExcursionPoint sample_excursion(const LengthTilt& tilt, std::size_t m, Rng& rng) {
  ExcursionPoint exc;
  exc.length = sample_excursion_length(tilt, rng);
  exc.path = normalized_excursion(m, rng);
  const double scale = std::sqrt(exc.length);
  for (double& y : exc.path) y *= scale;
  return exc;
}

namespace {

double band_time(std::span<const double> path, double dt, double lo, double hi) {
  double time = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double y0 = path[i];
    const double y1 = path[i + 1];
    const double ymin = std::min(y0, y1);
    const double ymax = std::max(y0, y1);
    if (ymax <= lo || ymin >= hi) continue;
    if (ymax == ymin) {
      time += dt;
      continue;
    }
    const double overlap = std::min(ymax, hi) - std::max(ymin, lo);
    if (overlap > 0.0) time += dt * overlap / (ymax - ymin);
  }
  return time;
}

}  // namespace

double local_time(const ExcursionPoint& exc, double level, double eps) {
  if (level <= 0.0 || exc.path.size() < 2) return 0.0;
  if (!(eps > 0.0)) throw ModelError("local time bandwidth must be positive");
  return band_time(exc.path, exc.spacing(), level - eps, level + eps) / (2.0 * eps);
}

void local_times(const ExcursionPoint& exc, std::span<const double> levels, double eps,
                 std::span<double> out) {
  if (exc.path.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double top = *std::max_element(exc.path.begin(), exc.path.end());
  for (std::size_t i = 0; i < levels.size(); ++i)
    out[i] = levels[i] - eps >= top ? 0.0 : local_time(exc, levels[i], eps);
}

double LocalTimeConfig::bandwidth(double length, std::size_t m) const {
  return scale * std::sqrt(length) * std::pow(static_cast<double>(m), -exponent);
}

std::size_t ExcursionGrid::points_for(double length) const {
  const double target = static_cast<double>(m_max) * std::sqrt(std::min(length, 1.0));
  const auto m = static_cast<std::size_t>(std::ceil(target));
  return std::clamp(m, std::max<std::size_t>(m_min, 3), std::max<std::size_t>(m_max, 3));
}

ExcursionPoint LazyExcursion::materialize(const ExcursionGrid& grid) const {
  Rng rng(seed);
  ExcursionPoint exc;
  exc.length = length;
  exc.path = normalized_excursion(grid.points_for(length), rng);
  const double scale = std::sqrt(length);
  for (double& y : exc.path) y *= scale;
  return exc;
}

LazyExcursion sample_lazy_excursion(const LengthTilt& tilt, Rng& rng) {
  LazyExcursion e;
  e.length = sample_excursion_length(tilt, rng);
  e.seed = rng();
  return e;
}

void excursion_local_times(const LazyExcursion& exc, std::span<const double> levels,
                           const ExcursionGrid& grid, const LocalTimeConfig& lt,
                           std::span<double> out) {
  const std::size_t m = grid.points_for(exc.length);
  const double eps = lt.bandwidth(exc.length, m);
  const double reach = kExcursionHeightCutoff * std::sqrt(exc.length);
  bool needed = false;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out[i] = 0.0;
    if (levels[i] > 0.0 && levels[i] - eps < reach) needed = true;
  }
  if (!needed) return;
  const ExcursionPoint path = exc.materialize(grid);
  local_times(path, levels, eps, out);
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] - eps >= reach) out[i] = 0.0;
}

double besq_kernel(double t, const BesqPoint& p, const ExcursionGrid& grid,
                   const LocalTimeConfig& lt) {
  const double level = t - p.birth;
  double out = 0.0;
  excursion_local_times(p.excursion, {&level, 1}, grid, lt, {&out, 1});
  return out;
}

double feller_kernel(double t, const LazyExcursion& u, double sigma, const ExcursionGrid& grid,
                     const LocalTimeConfig& lt) {
  const double level = sigma * sigma * t / 4.0;
  double out = 0.0;
  excursion_local_times(u, {&level, 1}, grid, lt, {&out, 1});
  return out;
}

LevyRepresentation<LazyExcursion> feller_representation(double a, double sigma, LengthTilt tilt,
                                                        ExcursionGrid grid, LocalTimeConfig lt) {
  if (!(a > 0.0)) throw ModelError("Feller initial value must be positive");
  const double kappa = sigma * sigma / 4.0;
  LevyRepresentation<LazyExcursion> rep;
  rep.sample = [tilt](Rng& rng) { return sample_lazy_excursion(tilt, rng); };
  rep.density = [tilt, a](const LazyExcursion& u) { return tilt.f(u.length) / a; };
  rep.kernel = [=](double t, const LazyExcursion& u) {
    return feller_kernel(t, u, sigma, grid, lt);
  };
  rep.kernel_on_grid = [=](const LazyExcursion& u, std::span<const double> times,
                           std::span<double> out) {
    std::vector<double> levels(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) levels[i] = kappa * times[i];
    excursion_local_times(u, levels, grid, lt, out);
  };
  return rep;
}

LevyRepresentation<BesqPoint> besq_representation(double beta, LengthTilt tilt,
                                                  ExcursionGrid grid, LocalTimeConfig lt) {
  if (!(beta > 0.0)) throw ModelError("BESQ dimension must be positive");
  LevyRepresentation<BesqPoint> rep;
  rep.sample = [tilt, beta](Rng& rng) {
    BesqPoint p;
    p.birth = rng.exponential() / beta;
    p.excursion = sample_lazy_excursion(tilt, rng);
    return p;
  };
  rep.density = [tilt, beta](const BesqPoint& p) {
    return std::exp(-beta * p.birth) * tilt.f(p.excursion.length);
  };
  rep.kernel = [=](double t, const BesqPoint& p) { return besq_kernel(t, p, grid, lt); };
  rep.kernel_on_grid = [=](const BesqPoint& p, std::span<const double> times,
                           std::span<double> out) {
    std::vector<double> levels(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) levels[i] = times[i] - p.birth;
    excursion_local_times(p.excursion, levels, grid, lt, out);
  };
  return rep;
}

// ---- Markov chains ------------------------------------------------------

std::size_t MarkovChainModel::index_of(const std::string& state) const {
  const auto it = std::find(states.begin(), states.end(), state);
  if (it == states.end()) throw ModelError("unknown state '" + state + "'");
  return static_cast<std::size_t>(it - states.begin());
}

Eigen::MatrixXd green_matrix(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() == 0) throw ModelError("transition matrix must be square");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (!(P(i, j) >= 0.0)) throw ModelError("transition probabilities must be >= 0");
      row += P(i, j);
    }
    if (row > 1.0 + 1e-12) throw ModelError("transition matrix row sum exceeds 1");
  }
  const double radius = P.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0 - 1e-12)) throw ModelError("chain is not transient (spectral radius >= 1)");
  const auto n = P.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  return (I - P).partialPivLu().solve(I);
}

MarkovChainModel make_chain(std::vector<std::string> states, Eigen::MatrixXd P) {
  if (states.empty()) states = FiniteIndexSet::range(static_cast<std::size_t>(P.rows())).labels();
  if (states.size() != static_cast<std::size_t>(P.rows()))
    throw ModelError("state list and transition matrix disagree in size");
  (void)FiniteIndexSet(states);  // distinct labels
  MarkovChainModel chain;
  chain.U = green_matrix(P);
  chain.states = std::move(states);
  chain.P = std::move(P);
  return chain;
}

namespace {

/// Next state, or size() when killed.
std::size_t step(const MarkovChainModel& chain, std::size_t from, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < chain.size(); ++j) {
    acc += chain.P(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(j));
    if (u < acc) return j;
  }
  return chain.size();
}

}  // namespace

std::vector<double> sample_visit_counts(const MarkovChainModel& chain, std::size_t start,
                                        Rng& rng) {
  std::vector<double> counts(chain.size(), 0.0);
  for (std::size_t x = start; x < chain.size(); x = step(chain, x, rng)) counts[x] += 1.0;
  return counts;
}

std::vector<double> sample_local_times_tilde(const MarkovChainModel& chain, std::size_t anchor,
                                             Rng& rng, LocalTimeClock clock) {
  if (anchor >= chain.size()) throw ModelError("anchor state out of range");
  std::vector<std::size_t> visits;
  for (std::size_t x = anchor; x < chain.size(); x = step(chain, x, rng)) visits.push_back(x);
  std::size_t last = 0;
  for (std::size_t k = 0; k < visits.size(); ++k)
    if (visits[k] == anchor) last = k;
  std::vector<double> L(chain.size(), 0.0);
  for (std::size_t k = 0; k <= last; ++k)
    L[visits[k]] += clock == LocalTimeClock::Continuous ? rng.exponential() : 1.0;
  return L;
}

// ---- permanental --------------------------------------------------------

PermanentalModel make_permanental(Eigen::MatrixXd U, double alpha,
                                  std::vector<std::string> states) {
  if (U.rows() != U.cols() || U.rows() == 0) throw ModelError("kernel must be square");
  const double scale = std::max(1.0, U.cwiseAbs().maxCoeff());
  if ((U - U.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ModelError("permanental sampler needs a symmetric kernel");
  const double k = 2.0 * alpha;
  if (!(alpha > 0.0) || std::abs(k - std::round(k)) > 1e-12)
    throw ModelError("permanental sampler needs 2 alpha to be a positive integer");
  Eigen::LLT<Eigen::MatrixXd> llt(U);
  if (llt.info() != Eigen::Success) throw ModelError("kernel is not positive definite");
  if (states.empty()) states = FiniteIndexSet::range(static_cast<std::size_t>(U.rows())).labels();
  if (states.size() != static_cast<std::size_t>(U.rows()))
    throw ModelError("state list and kernel disagree in size");
  PermanentalModel m;
  m.states = std::move(states);
  m.cholesky = llt.matrixL();
  m.U = std::move(U);
  m.alpha = alpha;
  return m;
}

std::vector<double> sample_permanental(const PermanentalModel& model, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(model.size());
  const auto k = static_cast<int>(std::lround(2.0 * model.alpha));
  std::vector<double> y(model.size(), 0.0);
  Eigen::VectorXd z(n);
  for (int i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) z(j) = rng.normal();
    const Eigen::VectorXd eta = model.cholesky.triangularView<Eigen::Lower>() * z;
    for (Eigen::Index j = 0; j < n; ++j) y[static_cast<std::size_t>(j)] += 0.5 * eta(j) * eta(j);
  }
  return y;
}

double permanental_laplace(const Eigen::MatrixXd& U, double alpha, std::span<const double> s) {
  const auto n = U.rows();
  if (static_cast<Eigen::Index>(s.size()) != n) throw ModelError("s has the wrong dimension");
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) M.col(j) += U.col(j) * s[static_cast<std::size_t>(j)];
  return std::pow(M.determinant(), -alpha);
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const char* name) {
  if (!rows.is_array() || rows.empty()) throw ModelError(std::string(name) + " must be a matrix");
  const auto n = rows.size();
  Eigen::MatrixXd M(n, rows[0].size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(M.cols()))
      throw ModelError(std::string(name) + " has ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!rows[i][j].is_number()) throw ModelError(std::string(name) + " entries must be numbers");
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return M;
}

std::vector<std::string> states_from_json(const nlohmann::json& doc) {
  std::vector<std::string> states;
  if (!doc.contains("states")) return states;
  for (const auto& s : doc.at("states"))
    states.push_back(s.is_string() ? s.get<std::string>() : s.dump());
  return states;
}

}  // namespace

MarkovChainModel chain_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("P")) throw ModelError("chain model needs a matrix P");
  return make_chain(states_from_json(doc), matrix_from_json(doc.at("P"), "P"));
}

PermanentalModel permanental_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ModelError("permanental model must be an object");
  const double alpha = doc.value("alpha", 0.5);
  auto states = states_from_json(doc);
  if (doc.contains("U")) return make_permanental(matrix_from_json(doc.at("U"), "U"), alpha, states);
  if (doc.contains("P")) {
    auto chain = make_chain(states, matrix_from_json(doc.at("P"), "P"));
    return make_permanental(chain.U, alpha, chain.states);
  }
  throw ModelError("permanental model needs U or P");
}

}  // namespace idsim
