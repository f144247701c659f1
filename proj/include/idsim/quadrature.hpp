#pragma once

#include <functional>
#include <span>

namespace idsim {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  unsigned max_depth = 18;  // hard subdivision cap
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (15 point) on [lo, hi]; either bound may be
/// infinite. Throws QuadratureError when the error estimate exceeds
/// max(rel_tol * |value|, abs_tol).
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts = {});

/// Same, split at the given interior breakpoints (sorted or not; points
/// outside (lo, hi) are ignored). Use for integrands with known jumps.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& opts = {});

}  // namespace idsim
