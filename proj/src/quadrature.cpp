#include "idsim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "idsim/errors.hpp"

namespace idsim {

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts) {
  if (lo == hi) return {};
  if (lo > hi) {
    auto r = integrate(f, hi, lo, opts);
    return {-r.value, r.error};
  }
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, opts.max_depth, opts.rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > std::max(opts.rel_tol * std::max(std::abs(value), l1),
                                                opts.abs_tol)) {
    std::ostringstream msg;
    msg << "quadrature on [" << lo << ", " << hi << "] did not converge: value " << value
        << ", error estimate " << error;
    throw QuadratureError(msg.str());
  }
  return {value, error};
}

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           std::span<const double> breakpoints, const QuadratureOptions& opts) {
  std::vector<double> cuts{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto piece = integrate(f, cuts[i], cuts[i + 1], opts);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

}  // namespace idsim
