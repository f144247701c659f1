#include "idsim/measure_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "idsim/errors.hpp"
#include "idsim/quadrature.hpp"

namespace idsim {

double CutoffFunction::operator()(double v) const {
  const double a = std::abs(v);
  switch (kind) {
    case CutoffKind::IndicatorUnitBall:
      return a <= 1.0 ? 1.0 : 0.0;
    case CutoffKind::InverseMax:
      return 1.0 / std::max(1.0, a);
    case CutoffKind::InverseQuadratic:
      return 1.0 / (1.0 + v * v);
  }
  return 1.0;
}

std::string to_string(CutoffKind kind) {
  switch (kind) {
    case CutoffKind::IndicatorUnitBall:
      return "indicator-unit-ball";
    case CutoffKind::InverseMax:
      return "inverse-max";
    case CutoffKind::InverseQuadratic:
      return "inverse-quadratic";
  }
  return "indicator-unit-ball";
}

CutoffKind cutoff_from_string(const std::string& name) {
  if (name == "indicator-unit-ball") return CutoffKind::IndicatorUnitBall;
  if (name == "inverse-max") return CutoffKind::InverseMax;
  if (name == "inverse-quadratic") return CutoffKind::InverseQuadratic;
  throw ModelError("unknown cutoff function '" + name + "'");
}

std::vector<double> truncate(std::span<const double> v, CutoffFunction chi) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = chi.truncate(v[k]);
  return out;
}

// --- index sets --------------------------------------------------------

FiniteIndexSet::FiniteIndexSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw ModelError("duplicate index label '" + l + "'");
  }
}

FiniteIndexSet FiniteIndexSet::range(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return FiniteIndexSet(std::move(labels));
}

std::optional<std::size_t> FiniteIndexSet::position(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

bool FiniteIndexSet::is_subset_of(const FiniteIndexSet& other) const {
  return std::all_of(labels_.begin(), labels_.end(),
                     [&](const std::string& l) { return other.position(l).has_value(); });
}

std::string FiniteIndexSet::describe() const {
  std::string s = "{";
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) s += ",";
    s += labels_[i];
  }
  return s + "}";
}

// --- atomic measures ---------------------------------------------------

namespace {

double max_norm(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

bool same_point(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d < 1e-12 * (1.0 + std::max(max_norm(a), max_norm(b)));
}

bool is_origin(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

}  // namespace

AtomicMeasure::AtomicMeasure(FiniteIndexSet index_set, std::vector<Atom> atoms)
    : index_set_(std::move(index_set)) {
  for (auto& a : atoms) add(std::move(a.point), a.weight);
}

void AtomicMeasure::add(std::vector<double> point, double weight) {
  if (point.size() != index_set_.dimension())
    throw ModelError("atom dimension does not match the index set");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw ModelError("atom weights must be finite and nonnegative");
  atoms_.push_back({std::move(point), weight});
}

double AtomicMeasure::total_mass() const {
  KahanSum s;
  for (const auto& a : atoms_) s += a.weight;
  return s.value();
}

double AtomicMeasure::origin_mass() const {
  KahanSum s;
  for (const auto& a : atoms_)
    if (is_origin(a.point)) s += a.weight;
  return s.value();
}

AtomicMeasure AtomicMeasure::normalized() const {
  std::vector<Atom> sorted = atoms_;
  std::sort(sorted.begin(), sorted.end(),
            [](const Atom& a, const Atom& b) { return a.point < b.point; });
  std::vector<Atom> merged;
  for (const auto& a : sorted) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Atom& m) { return same_point(m.point, a.point); });
    if (it != merged.end()) {
      it->weight += a.weight;
    } else {
      merged.push_back(a);
    }
  }
  std::erase_if(merged, [](const Atom& a) { return a.weight == 0.0; });
  AtomicMeasure out(index_set_);
  out.atoms_ = std::move(merged);
  return out;
}

ValidationReport validate_levy_measure(const AtomicMeasure& nu) {
  ValidationReport r;
  const std::size_t dim = nu.index_set().dimension();
  std::vector<KahanSum> sums(dim);
  for (const auto& a : nu.atoms()) {
    for (std::size_t t = 0; t < dim; ++t) sums[t] += a.weight * std::min(a.point[t] * a.point[t], 1.0);
  }
  r.finite_coordinate_integrals = true;
  for (std::size_t t = 0; t < dim; ++t) {
    const double v = sums[t].value();
    r.coordinate_integrals.push_back(v);
    if (!std::isfinite(v) || v > 1e300) {
      r.finite_coordinate_integrals = false;
      r.failures.push_back("L1: coordinate " + nu.index_set().labels()[t] +
                           " integral of |x|^2 ^ 1 overflows");
    }
  }
  r.origin_mass = nu.origin_mass();
  r.no_origin_mass = r.origin_mass == 0.0;
  if (!r.no_origin_mass) {
    std::ostringstream msg;
    msg << "L2: mass " << r.origin_mass << " at the origin";
    r.failures.push_back(msg.str());
  }
  r.pass = r.finite_coordinate_integrals && r.no_origin_mass;
  return r;
}

AtomicMeasure project_measure(const AtomicMeasure& nu_J, const FiniteIndexSet& I,
                              bool remove_origin) {
  const auto& J = nu_J.index_set();
  if (!I.is_subset_of(J))
    throw ModelError("index set " + I.describe() + " is not a subset of " + J.describe());
  std::vector<std::size_t> positions;
  for (const auto& l : I.labels()) positions.push_back(*J.position(l));
  AtomicMeasure out(I);
  for (const auto& a : nu_J.atoms()) {
    std::vector<double> x(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) x[k] = a.point[positions[k]];
    if (remove_origin && is_origin(x)) continue;
    out.add(std::move(x), a.weight);
  }
  return out.normalized();
}

bool measures_equal(const AtomicMeasure& a, const AtomicMeasure& b, double weight_tol) {
  if (!(a.index_set() == b.index_set())) return false;
  const auto na = a.normalized();
  const auto nb = b.normalized();
  // Atoms of weight <= tol on one side may be absent on the other.
  std::vector<bool> used(nb.atoms().size(), false);
  for (const auto& x : na.atoms()) {
    bool found = false;
    for (std::size_t j = 0; j < nb.atoms().size(); ++j) {
      if (!used[j] && same_point(x.point, nb.atoms()[j].point)) {
        used[j] = true;
        found = true;
        if (std::abs(x.weight - nb.atoms()[j].weight) > weight_tol) return false;
        break;
      }
    }
    if (!found && x.weight > weight_tol) return false;
  }
  for (std::size_t j = 0; j < nb.atoms().size(); ++j)
    if (!used[j] && nb.atoms()[j].weight > weight_tol) return false;
  return true;
}

ConsistencyResult check_consistency(std::span<const AtomicMeasure> family) {
  ConsistencyResult result;
  for (const auto& nu_J : family) {
    for (const auto& nu_I : family) {
      const auto& I = nu_I.index_set();
      const auto& J = nu_J.index_set();
      if (I == J || !I.is_subset_of(J)) continue;
      const double tol = 1e-12 * std::max(nu_J.total_mass(), nu_I.total_mass());
      const auto projected = project_measure(nu_J, I);
      if (!measures_equal(projected, nu_I, tol)) {
        result.consistent = false;
        result.violating_subset = I;
        result.violating_superset = J;
        result.detail = "projection of nu_" + J.describe() + " onto " + I.describe() +
                        " differs from nu_" + I.describe();
        return result;
      }
    }
  }
  return result;
}

AtomicMeasure minimal_extension(const AtomicMeasure& nu_T) {
  AtomicMeasure out(nu_T.index_set());
  for (const auto& a : nu_T.atoms())
    if (!is_origin(a.point)) out.add(a.point, a.weight);
  return out;
}

void require_nonempty_index_list(std::size_t n) {
  if (n == 0) throw ModelError("candidate index set T0 is empty");
}

// --- characteristic exponents ------------------------------------------

namespace {

std::complex<double> atomic_exponent(const AtomicMeasure& nu, std::span<const double> a,
                                     CutoffFunction chi) {
  KahanSum re, im;
  for (const auto& atom : nu.atoms()) {
    double inner = 0.0, inner_trunc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      inner += a[k] * atom.point[k];
      inner_trunc += a[k] * chi.truncate(atom.point[k]);
    }
    re += atom.weight * (std::cos(inner) - 1.0);
    im += atom.weight * (std::sin(inner) - inner_trunc);
  }
  return {re.value(), im.value()};
}

std::complex<double> ray_exponent(const RayDensity& ray, std::span<const double> a,
                                  CutoffFunction chi) {
  if (ray.direction.size() != a.size()) throw ModelError("ray direction dimension mismatch");
  double inner_dir = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) inner_dir += a[k] * ray.direction[k];
  auto trunc_inner = [&](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * chi.truncate(x * ray.direction[k]);
    return s;
  };
  std::vector<double> cuts = ray.breakpoints;
  cuts.push_back(0.0);
  for (double d : ray.direction) {
    if (d != 0.0) {
      cuts.push_back(1.0 / std::abs(d));
      cuts.push_back(-1.0 / std::abs(d));
    }
  }
  const auto re = integrate(
      [&](double x) {
        if (x == 0.0) return 0.0;
        return (std::cos(inner_dir * x) - 1.0) * ray.density(x);
      },
      ray.lo, ray.hi, cuts);
  const auto im = integrate(
      [&](double x) {
        if (x == 0.0) return 0.0;
        return (std::sin(inner_dir * x) - trunc_inner(x)) * ray.density(x);
      },
      ray.lo, ray.hi, cuts);
  return {re.value, im.value};
}

}  // namespace

void FiniteLevyStructure::validate() const {
  const auto n = shift.size();
  if (sigma.rows() != n || sigma.cols() != n) throw ModelError("sigma dimension mismatch");
  if (n > 0) {
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()))
      throw ModelError("sigma is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    const double scale = std::max(1.0, std::abs(sigma.trace()));
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
      throw ModelError("sigma is not nonnegative definite");
  }
  if (const auto* atomic = std::get_if<AtomicMeasure>(&levy)) {
    if (atomic->index_set().dimension() != static_cast<std::size_t>(n))
      throw ModelError("Levy measure dimension mismatch");
    const auto report = validate_levy_measure(*atomic);
    if (!report.pass) throw ModelError("invalid Levy measure: " + report.failures.front());
  } else {
    const auto& ray = std::get<RayDensity>(levy);
    if (ray.direction.size() != static_cast<std::size_t>(n))
      throw ModelError("Levy measure dimension mismatch");
    if (!ray.density) throw ModelError("ray density missing");
  }
}

std::complex<double> characteristic_exponent(const FiniteLevyStructure& triplet,
                                             std::span<const double> a, CutoffFunction chi) {
  if (a.size() != triplet.dimension()) throw ModelError("argument dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> av(a.data(), static_cast<Eigen::Index>(a.size()));
  const double gauss = -0.5 * av.dot(triplet.sigma * av);
  const double drift = av.dot(triplet.shift);
  std::complex<double> jumps;
  if (const auto* atomic = std::get_if<AtomicMeasure>(&triplet.levy)) {
    jumps = atomic_exponent(*atomic, a, chi);
  } else {
    jumps = ray_exponent(std::get<RayDensity>(triplet.levy), a, chi);
  }
  return {gauss + jumps.real(), drift + jumps.imag()};
}

std::complex<double> poisson_integral_exponent(const LevyMeasure& nu_1d, double theta,
                                               CutoffFunction chi) {
  const double a[1] = {theta};
  if (const auto* atomic = std::get_if<AtomicMeasure>(&nu_1d)) {
    if (atomic->index_set().dimension() != 1) throw ModelError("expected a measure on the line");
    return atomic_exponent(*atomic, a, chi);
  }
  const auto& ray = std::get<RayDensity>(nu_1d);
  if (ray.direction.size() != 1) throw ModelError("expected a measure on the line");
  return ray_exponent(ray, a, chi);
}

double truncated_mean(const LevyMeasure& nu_1d, CutoffFunction chi) {
  if (const auto* atomic = std::get_if<AtomicMeasure>(&nu_1d)) {
    KahanSum s;
    for (const auto& atom : atomic->atoms()) s += atom.weight * chi.truncate(atom.point.at(0));
    return s.value();
  }
  const auto& ray = std::get<RayDensity>(nu_1d);
  const double d = ray.direction.at(0);
  std::vector<double> cuts = ray.breakpoints;
  cuts.push_back(0.0);
  if (d != 0.0) {
    cuts.push_back(1.0 / std::abs(d));
    cuts.push_back(-1.0 / std::abs(d));
  }
  const auto r = integrate([&](double x) { return chi.truncate(x * d) * ray.density(x); },
                           ray.lo, ray.hi, cuts);
  if (!std::isfinite(r.value)) throw ModelError("non-finite compensator");
  return r.value;
}

// --- JSON --------------------------------------------------------------

nlohmann::json to_json(const AtomicMeasure& nu) {
  nlohmann::json doc;
  doc["indexSet"] = nu.index_set().labels();
  doc["atoms"] = nlohmann::json::array();
  for (const auto& a : nu.atoms()) doc["atoms"].push_back({{"point", a.point}, {"weight", a.weight}});
  return doc;
}

AtomicMeasure atomic_measure_from_json(const nlohmann::json& doc) {
  try {
    std::vector<std::string> labels;
    for (const auto& l : doc.at("indexSet")) {
      labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    }
    AtomicMeasure nu{FiniteIndexSet(std::move(labels))};
    for (const auto& a : doc.at("atoms")) {
      nu.add(a.at("point").get<std::vector<double>>(), a.at("weight").get<double>());
    }
    return nu;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed measure document: ") + e.what());
  }
}

}  // namespace idsim
