#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "idsim/levy_representation.hpp"
#include "idsim/rng.hpp"
#include "idsim/stats.hpp"
#include "json.hpp"

namespace idsim {

// Finite-index-set Levy measure algebra.

enum class CutoffKind { IndicatorUnitBall, InverseMax, InverseQuadratic };

/// Cutoff chi with chi(0) = 1. The default is the indicator of |v| <= 1.
struct CutoffFunction {
  CutoffKind kind = CutoffKind::IndicatorUnitBall;

  double operator()(double v) const;
  /// v * chi(|v|)
  double truncate(double v) const { return v * (*this)(std::abs(v)); }
};

std::string to_string(CutoffKind kind);
CutoffKind cutoff_from_string(const std::string& name);

/// Componentwise truncation v_k * chi(|v_k|).
std::vector<double> truncate(std::span<const double> v, CutoffFunction chi);

/// Ordered list of distinct index labels.
class FiniteIndexSet {
 public:
  FiniteIndexSet() = default;
  explicit FiniteIndexSet(std::vector<std::string> labels);
  /// Labels "1".."n".
  static FiniteIndexSet range(std::size_t n);

  std::size_t dimension() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> position(const std::string& label) const;
  bool is_subset_of(const FiniteIndexSet& other) const;
  std::string describe() const;

  friend bool operator==(const FiniteIndexSet&, const FiniteIndexSet&) = default;

 private:
  std::vector<std::string> labels_;
};

struct Atom {
  std::vector<double> point;
  double weight = 0.0;
};

/// Finite nonnegative combination of point masses on R^I.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(FiniteIndexSet index_set, std::vector<Atom> atoms = {});

  const FiniteIndexSet& index_set() const { return index_set_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  void add(std::vector<double> point, double weight);

  double total_mass() const;
  /// Total weight at the origin 0_I.
  double origin_mass() const;

  /// Duplicate points merged (max-norm distance < 1e-12 * (1 + |point|)),
  /// zero weights dropped, atoms sorted lexicographically.
  AtomicMeasure normalized() const;

 private:
  FiniteIndexSet index_set_;
  std::vector<Atom> atoms_;
};

/// Levy measure concentrated on the ray {x * direction : x in (lo, hi)} with
/// a density w.r.t. Lebesgue measure in x. Integrated by adaptive quadrature.
struct RayDensity {
  FiniteIndexSet index_set;
  std::vector<double> direction;
  std::function<double(double)> density;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::vector<double> breakpoints;
};

using LevyMeasure = std::variant<AtomicMeasure, RayDensity>;

/// Generating triplet on a finite index set.
struct FiniteLevyStructure {
  Eigen::MatrixXd sigma;
  LevyMeasure levy;
  Eigen::VectorXd shift;

  std::size_t dimension() const { return static_cast<std::size_t>(shift.size()); }
  /// Throws ModelError on asymmetric / indefinite sigma, dimension mismatch,
  /// or a Levy measure failing validation.
  void validate() const;
};

struct ValidationReport {
  bool pass = false;
  bool finite_coordinate_integrals = false;  // (L1)
  bool no_origin_mass = false;               // (L2)
  std::vector<double> coordinate_integrals;  // integral of |x(t)|^2 ^ 1
  double origin_mass = 0.0;
  std::vector<std::string> failures;
};

ValidationReport validate_levy_measure(const AtomicMeasure& nu);

/// Pushforward under the coordinate projection R^J -> R^I. When
/// remove_origin is set the mass landing on 0_I is dropped (restriction to
/// B_0^I). Throws ModelError unless I is a subset of J.
AtomicMeasure project_measure(const AtomicMeasure& nu_J, const FiniteIndexSet& I,
                              bool remove_origin = true);

/// Atomwise equality of normalized measures, weights within weight_tol.
bool measures_equal(const AtomicMeasure& a, const AtomicMeasure& b, double weight_tol);

struct ConsistencyResult {
  bool consistent = true;
  std::optional<FiniteIndexSet> violating_subset;    // I
  std::optional<FiniteIndexSet> violating_superset;  // J
  std::string detail;
};

/// Checks project(nu_J, I) == nu_I for every stored pair I strictly inside J.
ConsistencyResult check_consistency(std::span<const AtomicMeasure> family);

/// Deletes the origin atom.
AtomicMeasure minimal_extension(const AtomicMeasure& nu_T);

/// log E exp(i<a, X_I>) for the triplet.
std::complex<double> characteristic_exponent(const FiniteLevyStructure& triplet,
                                             std::span<const double> a, CutoffFunction chi = {});

/// Integral of (e^{i theta x} - 1 - i theta x chi(|x|)) nu(dx) for a Levy
/// measure on the line (the int-cf exponent of a compensated integral).
std::complex<double> poisson_integral_exponent(const LevyMeasure& nu_1d, double theta,
                                               CutoffFunction chi = {});

/// Integral of x chi(|x|) nu(dx) on the line (the compensator of N(f)).
double truncated_mean(const LevyMeasure& nu_1d, CutoffFunction chi = {});

struct WitnessReport {
  std::uint64_t probes = 0;
  std::uint64_t vanishing = 0;  // probes with V_t(s) = 0 for all t in T0
  BinomialInterval interval;
  double threshold = 1e-3;
  bool witnessed = false;
};

/// MC estimate of n1{s : V_t(s) = 0 for all t in T0}. Witnessed when the
/// upper 95% Clopper-Pearson bound is below threshold. A witness, not a proof.
template <class Point>
WitnessReport sigma_finiteness_witness(const LevyRepresentation<Point>& rep,
                                       std::span<const double> candidate_T0, std::uint64_t probes,
                                       Rng& rng, double threshold = 1e-3);

nlohmann::json to_json(const AtomicMeasure& nu);
AtomicMeasure atomic_measure_from_json(const nlohmann::json& doc);

// --- template implementation -------------------------------------------

void require_nonempty_index_list(std::size_t n);

template <class Point>
WitnessReport sigma_finiteness_witness(const LevyRepresentation<Point>& rep,
                                       std::span<const double> candidate_T0, std::uint64_t probes,
                                       Rng& rng, double threshold) {
  require_nonempty_index_list(candidate_T0.size());
  WitnessReport report;
  report.probes = probes;
  report.threshold = threshold;
  std::vector<double> values(candidate_T0.size());
  for (std::uint64_t i = 0; i < probes; ++i) {
    const Point s = rep.sample(rng);
    rep.evaluate(s, candidate_T0, values);
    bool all_zero = true;
    for (double v : values) all_zero = all_zero && v == 0.0;
    if (all_zero) ++report.vanishing;
  }
  report.interval = clopper_pearson(report.vanishing, probes);
  report.witnessed = probes > 0 && report.interval.upper < threshold;
  return report;
}

}  // namespace idsim
