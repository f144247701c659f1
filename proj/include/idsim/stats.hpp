#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace idsim {

/// Kahan-Babuska (Neumaier) compensated sum.
class KahanSum {
 public:
  void add(double x);
  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Sample mean and standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};

MeanEstimate estimate_mean(std::span<const double> values);

/// Mean of the central (1 - 2*fraction) part of the sorted sample.
double trimmed_mean(std::span<const double> values, double fraction);

/// Paired MC comparison of two sides of an identity.
struct IdentityReport {
  std::string name;
  double lhs_mean = 0.0;
  double lhs_se = 0.0;
  double rhs_mean = 0.0;
  double rhs_se = 0.0;
  double z = 0.0;
  std::uint64_t reps = 0;
  double z_crit = 4.0;
  bool paired = false;  // common random numbers; z from the difference sample
  bool pass = false;
  double lhs_trimmed = 0.0;  // 1% trimmed means, diagnostic only
  double rhs_trimmed = 0.0;
  std::map<std::string, double> extras;
};

/// Independent-arm report: z = (lhs - rhs) / sqrt(se_l^2 + se_r^2).
IdentityReport compare_independent(std::string name, std::span<const double> lhs,
                                   std::span<const double> rhs, double z_crit = 4.0);

/// Common-random-number report: z from the per-replication differences.
IdentityReport compare_paired(std::string name, std::span<const double> lhs,
                              std::span<const double> rhs, double z_crit = 4.0);

/// z statistic for two independent estimates. Returns 0 when both SEs are 0
/// and the means agree exactly, +-inf when they differ.
double z_statistic(double a, double se_a, double b, double se_b);

/// sup_x |F_n(x) - cdf(x)|.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// sup_x |F_n(x) - G_m(x)|, ties handled exactly (atoms are fine).
double ks_distance(std::vector<double> a, std::vector<double> b);

/// Asymptotic Kolmogorov p-value for statistic d with effective size n_eff.
double ks_pvalue(double d, double n_eff);

/// Clopper-Pearson interval for a binomial proportion.
struct BinomialInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};
BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials,
                                 double confidence = 0.95);

}  // namespace idsim
