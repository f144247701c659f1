#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "idsim/rng.hpp"

namespace idsim {

/// A process realization on a finite time (or index) grid.
struct SamplePath {
  std::vector<double> times;
  std::vector<double> values;

  SamplePath() = default;
  explicit SamplePath(std::vector<double> grid)
      : times(std::move(grid)), values(times.size(), 0.0) {}

  std::size_t size() const { return times.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  /// Value at the grid point equal to t; throws ModelError if t is off-grid.
  double at(double t) const;
};

/// Representation (S, n, V) of a Levy measure, together with a probability
/// measure n1 = g * n that is equivalent to n.
///
/// `Point` is an element of S. Implementations keep points cheap to copy;
/// heavy state (excursion paths) is materialized lazily by the kernel.
template <class Point>
struct LevyRepresentation {
  /// Draws from n1.
  std::function<Point(Rng&)> sample;
  /// g = dn1/dn, positive on the support of `sample`.
  std::function<double(const Point&)> density;
  /// V_t(s).
  std::function<double(double, const Point&)> kernel;
  /// Optional grid evaluation of V_.(s); must agree with `kernel`.
  std::function<void(const Point&, std::span<const double>, std::span<double>)> kernel_on_grid;
  /// Total mass of n when finite.
  std::optional<double> finite_mass;
  /// Optional closed form of n{s : tau < 1/g(s)} weighted as in the strip
  /// construction, i.e. the integral of (1 - tau*g)^+ dn.
  std::function<double(double)> discarded_mass;

  void evaluate(const Point& s, std::span<const double> grid, std::span<double> out) const {
    if (kernel_on_grid) {
      kernel_on_grid(s, grid, out);
      return;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = kernel(grid[i], s);
  }

  /// Expected n-mass of the strip beyond budget tau; +inf when unknown.
  double discarded(double tau) const {
    if (discarded_mass) return discarded_mass(tau);
    return std::numeric_limits<double>::infinity();
  }
};

/// One realization of a Poisson random measure: a finite list of points,
/// each with the arrival mark Gamma_j when produced by the strip sampler.
template <class Point>
struct PointConfiguration {
  struct Entry {
    Point point;
    double mark = 0.0;
  };
  std::vector<Entry> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void add(Point p, double mark = 0.0) { points.push_back({std::move(p), mark}); }
};

}  // namespace idsim
