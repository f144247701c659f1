#include <cmath>
#include <numbers>

#include "doctest.h"
#include "idsim/errors.hpp"
#include "idsim/parallel.hpp"
#include "idsim/representations.hpp"
#include "oracles.hpp"

using namespace idsim;

namespace {

ExcursionPoint tent(std::size_t m) {
  // height 1 over [0, 2], slopes +-1
  ExcursionPoint e;
  e.length = 2.0;
  e.path.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = 2.0 * static_cast<double>(i) / static_cast<double>(m - 1);
    e.path[i] = 1.0 - std::abs(t - 1.0);
  }
  return e;
}

double inverse_2x2_entry(double p, int i, int j) {
  // (I - [[0, p], [p, 0]])^{-1}
  const double det = 1.0 - p * p;
  return (i == j ? 1.0 : p) / det;
}

}  // namespace

TEST_CASE("Levy kernel") {
  CHECK(levy_kernel(1.0, {0.5, 2.0}) == 2.0);
  CHECK(levy_kernel(1.0, {1.5, 2.0}) == 0.0);
  CHECK(levy_kernel(1.0, {1.0, 2.0}) == 2.0);
}

TEST_CASE("excursion lengths under the standard tilt") {
  const auto tilt = LengthTilt::standard_tilt();
  CHECK(tilt.f(0.5) == doctest::Approx(std::sqrt(std::numbers::pi / 2) * 0.5));
  CHECK(tilt.f(3.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2)));

  const std::size_t n = 200000;
  std::vector<double> R(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(21, i);
    R[i] = sample_excursion_length(tilt, rng);
  }
  double below = 0.0;
  for (double r : R) below += r <= 1.0;
  CHECK(std::abs(below / n - 0.5) < 4.0 * std::sqrt(0.25 / n));

  // n+(R > x) = (2 pi x)^{-1/2} by reweighting with 1/f
  for (double x : {0.25, 1.0, 4.0}) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = R[i] > x ? 1.0 / tilt.f(R[i]) : 0.0;
    const auto m = estimate_mean(w);
    CHECK(std::abs(m.mean - 1.0 / std::sqrt(2.0 * std::numbers::pi * x)) < 4.0 * m.se);
  }

  // tilted cdf: R <= x has probability sqrt(x)/2 on (0, 1], 1 - 1/(2 sqrt x) above
  const double d = oracle::ks_one_sample(R, [](double x) {
    return x <= 1.0 ? 0.5 * std::sqrt(x) : 1.0 - 0.5 / std::sqrt(x);
  });
  CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)) * 1.5);
}

TEST_CASE("custom tilt") {
  // f = c x / (1 + x): int f dn+ = c (2 sqrt(2 pi))^{-1} int x^{-1/2} / (1 + x) dx = c pi / (2 sqrt(2 pi))
  const double c = 2.0 * std::sqrt(2.0 * std::numbers::pi) / std::numbers::pi;
  auto f = [c](double x) { return c * x / (1.0 + x); };
  const auto tilt = LengthTilt::custom(f, 4.0 / std::numbers::pi);
  Rng rng = Rng::stream(22, 0);
  std::vector<double> w(100000);
  for (auto& x : w) {
    const double R = sample_excursion_length(tilt, rng);
    x = R > 2.0 ? 1.0 / f(R) : 0.0;
  }
  const auto m = estimate_mean(w);
  CHECK(std::abs(m.mean - 1.0 / std::sqrt(4.0 * std::numbers::pi)) < 4.0 * m.se);
  CHECK_THROWS_AS(LengthTilt::custom([](double x) { return 2.0 * std::min(x, 1.0); }, 2.0),
                  ModelError);
}

TEST_CASE("normalized excursions") {
  Rng rng = Rng::stream(23, 0);
  CHECK_THROWS_AS(normalized_excursion(2, rng), ModelError);
  for (std::size_t m : {3u, 10u, 1000u}) {
    const auto e = normalized_excursion(m, rng);
    REQUIRE(e.size() == m);
    CHECK(e.front() == 0.0);
    CHECK(e.back() == 0.0);
    for (std::size_t i = 1; i + 1 < m; ++i) CHECK(e[i] > 0.0);
  }
  // E[max] of the normalized excursion is sqrt(pi / 2)
  std::vector<double> mx(4000);
  for (auto& x : mx) {
    const auto e = normalized_excursion(4000, rng);
    x = *std::max_element(e.begin(), e.end());
  }
  const auto m = estimate_mean(mx);
  CHECK(std::abs(m.mean - std::sqrt(std::numbers::pi / 2)) < 4.0 * m.se + 0.02);
}

TEST_CASE("local time estimator") {
  const auto e = tent(2001);
  CHECK(local_time(e, 0.0, 0.01) == 0.0);
  CHECK(local_time(e, -1.0, 0.01) == 0.0);
  CHECK(local_time(e, 1.2, 0.01) == 0.0);
  CHECK(local_time(e, 0.5, 0.01) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(local_time(e, 0.5, 1e-4) == doctest::Approx(2.0).epsilon(1e-9));

  // occupation formula over a fine level grid
  Rng rng = Rng::stream(24, 0);
  double total_error = 0.0;
  const int count = 100;
  for (int k = 0; k < count; ++k) {
    auto exc = sample_excursion(LengthTilt::standard_tilt(), 10000, rng);
    const double eps = LocalTimeConfig{}.bandwidth(exc.length, exc.path.size());
    const double top = *std::max_element(exc.path.begin(), exc.path.end()) + eps;
    const int levels = 4000;
    const double h = top / levels;
    double integral = 0.0;
    for (int j = 1; j <= levels; ++j) integral += h * local_time(exc, j * h, eps);
    total_error += std::abs(integral - exc.length) / exc.length;
  }
  CHECK(total_error / count < 0.02);
}

TEST_CASE("Brownian scaling of local times") {
  Rng rng = Rng::stream(25, 0);
  const auto unit = normalized_excursion(10000, rng);
  const double R = 9.0;
  ExcursionPoint e1{1.0, unit}, eR{R, unit};
  for (auto& x : eR.path) x *= std::sqrt(R);
  for (double a : {0.3, 0.6, 1.0}) {
    const double eps = 0.01;
    const double lhs = local_time(eR, a * std::sqrt(R), eps * std::sqrt(R));
    const double rhs = std::sqrt(R) * local_time(e1, a, eps);
    if (rhs > 0.05) CHECK(std::abs(lhs - rhs) / rhs < 0.05);
  }
}

TEST_CASE("excursion kernels") {
  Rng rng = Rng::stream(26, 0);
  const LazyExcursion exc{2.0, rng()};
  const ExcursionGrid grid;
  const LocalTimeConfig lt;
  CHECK(besq_kernel(1.0, BesqPoint{1.5, exc}, grid, lt) == 0.0);
  CHECK(feller_kernel(0.0, exc, 1.3, grid, lt) == 0.0);

  const auto path = exc.materialize(grid);
  const double sigma = 1.3, t = 0.7, level = sigma * sigma * t / 4.0;
  CHECK(feller_kernel(t, exc, sigma, grid, lt) ==
        local_time(path, level, lt.bandwidth(exc.length, path.path.size())));
  CHECK(besq_kernel(1.2, BesqPoint{0.4, exc}, grid, lt) ==
        local_time(path, 0.8, lt.bandwidth(exc.length, path.path.size())));

  // lazy evaluation agrees with the materialized path
  std::vector<double> levels{0.1, 0.5, 1.0, 40.0}, out(4);
  excursion_local_times(exc, levels, grid, lt, out);
  for (std::size_t i = 0; i < levels.size(); ++i)
    CHECK(out[i] == local_time(path, levels[i], lt.bandwidth(exc.length, path.path.size())));
  CHECK(out[3] == 0.0);
}

TEST_CASE("Green matrix") {
  CHECK(green_matrix(Eigen::MatrixXd::Constant(1, 1, 0.5))(0, 0) == doctest::Approx(2.0));
  CHECK(green_matrix(Eigen::MatrixXd::Zero(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  const Eigen::Matrix2d P{{0.0, 0.4}, {0.4, 0.0}};
  const auto U = green_matrix(P);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(U(i, j) == doctest::Approx(inverse_2x2_entry(0.4, i, j)));
  CHECK(U(0, 0) == doctest::Approx(1.1905).epsilon(1e-4));
  CHECK(U(0, 1) == doctest::Approx(0.4762).epsilon(1e-4));

  CHECK_THROWS_AS(green_matrix(Eigen::Matrix2d{{0.5, 0.5}, {0.5, 0.5}}), ModelError);
  CHECK_THROWS_AS(green_matrix(Eigen::Matrix2d{{0.9, 0.2}, {0.0, 0.5}}), ModelError);
  CHECK_THROWS_AS(green_matrix(Eigen::Matrix2d{{-0.1, 0.2}, {0.0, 0.5}}), ModelError);

  // expected visit counts
  const auto chain = make_chain({"x", "y", "z"}, Eigen::Matrix3d{{0.1, 0.3, 0.2}, {0.2, 0.0, 0.5}, {0.3, 0.3, 0.1}});
  for (std::size_t start = 0; start < 3; ++start) {
    const auto visits = replicate<std::vector<double>>(100000, [&](std::uint64_t i) {
      Rng rng = Rng::stream(27 + start, i);
      return sample_visit_counts(chain, start, rng);
    });
    for (std::size_t y = 0; y < 3; ++y) {
      std::vector<double> col(visits.size());
      for (std::size_t i = 0; i < visits.size(); ++i) col[i] = visits[i][y];
      const auto m = estimate_mean(col);
      CHECK(std::abs(m.mean - chain.U(start, y)) < 4.0 * m.se);
    }
  }
}

TEST_CASE("local times killed at the last visit") {
  const auto dead = make_chain({"a", "b"}, Eigen::Matrix2d::Zero());
  Rng rng = Rng::stream(30, 0);
  const auto L = sample_local_times_tilde(dead, 0, rng, LocalTimeClock::VisitCount);
  CHECK(L == std::vector<double>{1.0, 0.0});
  const auto Lc = sample_local_times_tilde(dead, 0, rng);
  CHECK(Lc[0] > 0.0);
  CHECK(Lc[1] == 0.0);

  // Laplace transform: (1 / u(a,a)) d/ds_a log|I + U S|
  const double p = 0.4;
  const auto chain = make_chain({"a", "b"}, Eigen::Matrix2d{{0.0, p}, {p, 0.0}});
  const double U[2][2] = {{inverse_2x2_entry(p, 0, 0), inverse_2x2_entry(p, 0, 1)},
                          {inverse_2x2_entry(p, 1, 0), inverse_2x2_entry(p, 1, 1)}};
  const std::uint64_t reps = 100000;
  const auto draws = replicate<std::vector<double>>(reps, [&](std::uint64_t i) {
    Rng r = Rng::stream(31, i);
    return sample_local_times_tilde(chain, 0, r);
  });
  for (auto [s0, s1] : {std::pair{0.5, 0.0}, std::pair{1.0, 2.0}, std::pair{0.2, 0.7}}) {
    std::vector<double> v(reps);
    for (std::size_t i = 0; i < reps; ++i) v[i] = std::exp(-s0 * draws[i][0] - s1 * draws[i][1]);
    const auto m = estimate_mean(v);
    // -(1/alpha) d/ds log det^{-alpha} = (1/det) d det / ds_a, via the moment oracle at alpha = 1
    const double expected = oracle::permanental_moment_2x2(U, 1.0, s0, s1, 0) /
                            oracle::permanental_laplace_2x2(U, 1.0, s0, s1) / U[0][0];
    CHECK(std::abs(m.mean - expected) < 4.0 * m.se);
  }
  // E_a L^y = u(a, y) u(y, a) / u(a, a) under the last-visit law
  for (int y = 0; y < 2; ++y) {
    std::vector<double> v(reps);
    for (std::size_t i = 0; i < reps; ++i) v[i] = draws[i][y];
    const auto m = estimate_mean(v);
    CHECK(std::abs(m.mean - U[0][y] * U[y][0] / U[0][0]) < 4.0 * m.se);
  }
}

TEST_CASE("permanental vectors") {
  CHECK_THROWS_AS(make_permanental(Eigen::MatrixXd::Identity(2, 2), 0.3), ModelError);
  CHECK_THROWS_AS(make_permanental(Eigen::Matrix2d{{1.0, 2.0}, {2.0, 1.0}}, 0.5), ModelError);
  CHECK_THROWS_AS(make_permanental(Eigen::Matrix2d{{1.0, 0.1}, {0.2, 1.0}}, 0.5), ModelError);

  const std::vector<double> one{1.0};
  CHECK(permanental_laplace(Eigen::MatrixXd::Constant(1, 1, 1.0), 0.5, one) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));

  const auto scalar = make_permanental(Eigen::MatrixXd::Constant(1, 1, 1.0), 0.5);
  std::vector<double> y(100000), e(100000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    Rng rng = Rng::stream(40, i);
    y[i] = sample_permanental(scalar, rng)[0];
    e[i] = std::exp(-y[i]);
  }
  const auto lt = estimate_mean(e);
  CHECK(std::abs(lt.mean - 0.70711) < 4.0 * lt.se);
  const auto mean = estimate_mean(y);
  CHECK(std::abs(mean.mean - 0.5) < 4.0 * mean.se);

  // alpha = 1: marginals are Gamma(1, u(x, x))
  const auto two = make_permanental(Eigen::Matrix2d{{2.0, 0.5}, {0.5, 1.0}}, 1.0);
  std::vector<double> y0(20000), y1(20000);
  for (std::size_t i = 0; i < y0.size(); ++i) {
    Rng rng = Rng::stream(41, i);
    const auto v = sample_permanental(two, rng);
    y0[i] = v[0];
    y1[i] = v[1];
  }
  CHECK(oracle::ks_one_sample(y0, [](double x) { return oracle::gamma_cdf(x, 1.0, 2.0); }) < 0.02);
  CHECK(oracle::ks_one_sample(y1, [](double x) { return oracle::gamma_cdf(x, 1.0, 1.0); }) < 0.02);

  const double U2[2][2] = {{2.0, 0.5}, {0.5, 1.0}};
  const std::vector<double> s{0.3, 1.1};
  CHECK(permanental_laplace(two.U, 1.0, s) ==
        doctest::Approx(oracle::permanental_laplace_2x2(U2, 1.0, 0.3, 1.1)).epsilon(1e-12));
}

TEST_CASE("compound Poisson paths") {
  const std::vector<double> grid{0.5, 1.0};
  KernelPathSampler ones = [](Rng&, std::span<const double> g, std::span<double> out) {
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = 1.0;
  };
  Rng rng = Rng::stream(50, 0);
  const auto zero = compound_poisson_sample(ones, 0.0, grid, rng);
  CHECK(zero.values == std::vector<double>{0.0, 0.0});

  const std::size_t n = 100000;
  std::vector<double> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = Rng::stream(51, i);
    counts[i] = compound_poisson_sample(ones, 3.0, grid, r).values[1];
  }
  for (unsigned k = 0; k < 9; ++k) {
    double hits = 0;
    for (double c : counts) hits += c == k;
    const double p = oracle::poisson_pmf(k, 3.0);
    CHECK(std::abs(hits / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }

  // cf of a.Y against exp(theta E(e^{i a.V} - 1)) with V_t = 1{t >= r} v, r ~ U[0,1], v = +-1
  KernelPathSampler jump = [](Rng& r, std::span<const double> g, std::span<double> out) {
    const double time = r.uniform();
    const double size = r.uniform() < 0.5 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = levy_kernel(g[i], {time, size});
  };
  const double a0 = 0.7, a1 = -1.2, theta = 2.0;
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = Rng::stream(52, i);
    const auto p = compound_poisson_sample(jump, theta, grid, r);
    const double x = a0 * p.values[0] + a1 * p.values[1];
    re[i] = std::cos(x);
    im[i] = std::sin(x);
  }
  // E e^{i a.V}: r < 0.5 hits both coordinates, else only the second; v symmetric
  const double ev = 0.5 * std::cos(a0 + a1) + 0.5 * std::cos(a1);
  const double expected = std::exp(theta * (ev - 1.0));
  const auto mre = estimate_mean(re), mim = estimate_mean(im);
  CHECK(std::abs(mre.mean - expected) < 4.0 * mre.se);
  CHECK(std::abs(mim.mean) < 4.0 * mim.se);
}

TEST_CASE("JSON models") {
  const auto chain = chain_from_json(nlohmann::json{{"states", {"a", "b"}}, {"P", {{0.0, 0.4}, {0.4, 0.0}}}});
  CHECK(chain.index_of("b") == 1);
  CHECK_THROWS_AS(chain.index_of("c"), ModelError);
  const auto per = permanental_from_json(nlohmann::json{{"P", {{0.0, 0.4}, {0.4, 0.0}}}, {"alpha", 1.0}});
  CHECK(per.U(0, 1) == doctest::Approx(inverse_2x2_entry(0.4, 0, 1)));
  CHECK(per.alpha == 1.0);
  CHECK_THROWS_AS(chain_from_json(nlohmann::json{{"P", {{1.0}}}}), ModelError);
}
