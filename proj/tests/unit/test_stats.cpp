#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "idsim/errors.hpp"
#include "idsim/stats.hpp"
#include "oracles.hpp"

using namespace idsim;

TEST_CASE("mean and standard error") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = estimate_mean(v);
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt((5.0 / 3.0) / 4.0)));
  CHECK(estimate_mean(std::vector<double>{7.0}).se == 0.0);
  CHECK(estimate_mean(std::vector<double>{}).n == 0);

  // 1e8 + many small terms: compensated summation keeps them
  std::vector<double> w(1001, 1e-8);
  w[0] = 1e8;
  CHECK(estimate_mean(w).mean * 1001.0 == doctest::Approx(1e8 + 1000e-8).epsilon(1e-15));

  std::vector<double> t{-1000.0, 1.0, 2.0, 3.0, 1000.0};
  CHECK(trimmed_mean(t, 0.2) == 2.0);
}

TEST_CASE("z statistics") {
  CHECK(z_statistic(1.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(z_statistic(2.0, 0.0, 1.0, 0.0) == std::numeric_limits<double>::infinity());
  CHECK(z_statistic(0.0, 0.0, 1.0, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(z_statistic(1.0, 0.3, 0.0, 0.4) == doctest::Approx(2.0));

  const std::vector<double> a{1.0, 2.0, 3.0}, b{1.5, 2.5, 3.5};
  const auto paired = compare_paired("shift", a, b);
  CHECK(paired.paired);
  CHECK(std::isinf(paired.z));  // constant difference, zero SE
  CHECK_FALSE(paired.pass);
  CHECK_THROWS_AS(compare_paired("n", a, std::vector<double>{1.0}), ModelError);
  const auto indep = compare_independent("same", a, a);
  CHECK(indep.z == 0.0);
  CHECK(indep.pass);
}

TEST_CASE("Kolmogorov-Smirnov distances") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  std::vector<double> x(3000), y(2000);
  for (auto& v : x) v = normal(gen);
  for (auto& v : y) v = 0.1 + normal(gen);
  CHECK(ks_distance(x, y) == doctest::Approx(oracle::ks_two_sample(x, y)).epsilon(1e-12));

  auto phi = [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
  CHECK(ks_distance(x, phi) == doctest::Approx(oracle::ks_one_sample(x, phi)).epsilon(1e-12));

  // ties: {0,0,1} vs {0,1,1} differ by 1/3 at 0
  CHECK(ks_distance(std::vector<double>{0, 0, 1}, std::vector<double>{0, 1, 1}) ==
        doctest::Approx(1.0 / 3.0));
  // a point mass at 0 against its own cdf
  CHECK(ks_distance(std::vector<double>(10, 0.0), [](double t) { return t >= 0.0 ? 1.0 : 0.0; }) == 0.0);

  CHECK(ks_pvalue(0.0, 100) == 1.0);
  CHECK(ks_pvalue(1.36 / std::sqrt(1e4), 1e4) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("Clopper-Pearson") {
  const auto none = clopper_pearson(0, 1000);
  CHECK(none.lower == 0.0);
  // upper bound for zero successes: 1 - (alpha/2)^{1/n}
  CHECK(none.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 1000.0)));
  const auto half = clopper_pearson(50, 100);
  CHECK(half.estimate == 0.5);
  CHECK(half.lower < 0.5);
  CHECK(half.upper > 0.5);
  CHECK(half.upper - 0.5 == doctest::Approx(0.5 - half.lower));
}
