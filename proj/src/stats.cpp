#include "idsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>

#include "idsim/errors.hpp"

namespace idsim {

void KahanSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate est;
  est.n = values.size();
  if (values.empty()) return est;
  KahanSum sum;
  for (double v : values) sum += v;
  est.mean = sum.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    KahanSum ss;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    const double var = ss.value() / static_cast<double>(values.size() - 1);
    est.se = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

double trimmed_mean(std::span<const double> values, double fraction) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto cut = static_cast<std::size_t>(fraction * static_cast<double>(sorted.size()));
  if (2 * cut >= sorted.size()) return sorted[sorted.size() / 2];
  KahanSum sum;
  for (std::size_t i = cut; i < sorted.size() - cut; ++i) sum += sorted[i];
  return sum.value() / static_cast<double>(sorted.size() - 2 * cut);
}

double z_statistic(double a, double se_a, double b, double se_b) {
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  const double diff = a - b;
  if (se == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  }
  return diff / se;
}

namespace {

void fill_arms(IdentityReport& r, std::span<const double> lhs, std::span<const double> rhs) {
  const auto l = estimate_mean(lhs);
  const auto h = estimate_mean(rhs);
  r.lhs_mean = l.mean;
  r.lhs_se = l.se;
  r.rhs_mean = h.mean;
  r.rhs_se = h.se;
  r.reps = std::max(lhs.size(), rhs.size());
  r.lhs_trimmed = trimmed_mean(lhs, 0.01);
  r.rhs_trimmed = trimmed_mean(rhs, 0.01);
}

}  // namespace

IdentityReport compare_independent(std::string name, std::span<const double> lhs,
                                   std::span<const double> rhs, double z_crit) {
  IdentityReport r;
  r.name = std::move(name);
  r.z_crit = z_crit;
  fill_arms(r, lhs, rhs);
  r.z = z_statistic(r.lhs_mean, r.lhs_se, r.rhs_mean, r.rhs_se);
  r.pass = std::abs(r.z) < z_crit;
  return r;
}

IdentityReport compare_paired(std::string name, std::span<const double> lhs,
                              std::span<const double> rhs, double z_crit) {
  if (lhs.size() != rhs.size()) throw ModelError("paired comparison needs equal sample sizes");
  IdentityReport r;
  r.name = std::move(name);
  r.z_crit = z_crit;
  r.paired = true;
  fill_arms(r, lhs, rhs);
  std::vector<double> diff(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
  const auto d = estimate_mean(diff);
  r.z = z_statistic(d.mean, d.se, 0.0, 0.0);
  r.pass = std::abs(r.z) < z_crit;
  return r;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sample.size()) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    const double f = cdf(sample[i]);
    // left limit of the empirical cdf vs. the model cdf just below the point
    d = std::max(d, std::abs(f - static_cast<double>(j) / n));
    d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(std::nextafter(sample[i], -INFINITY))));
    i = j;
  }
  return d;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, double n_eff) {
  if (d <= 0.0) return 1.0;
  // Asymptotic Kolmogorov distribution with the Stephens correction.
  const double sn = std::sqrt(n_eff);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  BinomialInterval ci;
  if (trials == 0) return ci;
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  ci.estimate = k / n;
  ci.lower = successes == 0 ? 0.0
                            : boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1),
                                                    alpha / 2);
  ci.upper = successes == trials
                 ? 1.0
                 : boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k),
                                         1 - alpha / 2);
  return ci;
}

}  // namespace idsim
