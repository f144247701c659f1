#include <cmath>

#include <boost/math/special_functions/expint.hpp>

#include "doctest.h"
#include "idsim/isomorphism.hpp"
#include "oracles.hpp"

using namespace idsim;

namespace {

// Poisson process of rate 1 on [0, 30]: X = N, F = exp(-N_1), q(r) = e^{-r}.
constexpr double kHorizon = 30.0;

ProcessModel<JumpPoint> poisson_model() {
  ProcessModel<JumpPoint> m;
  m.rep = levy_representation(1.0, kHorizon, point_jump_law(1.0, 1.0));
  m.grid = {1.0};
  return m;
}

double q_exp(const JumpPoint& p) { return std::exp(-p.time); }
double F_exp(const SamplePath& x) { return std::exp(-x.values[0]); }

bool within(double value, double se, double target, double z = 4.0) {
  return std::abs(value - target) < z * se;
}

}  // namespace

TEST_CASE("iso2 on a poisson process") {
  const double oracle = oracle::poisson_shift_value(kHorizon);
  const auto r = verify_iso2(poisson_model(), q_exp, F_exp, 20000, 1);
  CHECK(r.pass);
  CHECK(within(r.lhs_mean, r.lhs_se, oracle));
  CHECK(within(r.rhs_mean, r.rhs_se, oracle));

  IsoOptions off;
  off.rhs_weight_scale = 1.5;
  CHECK_FALSE(verify_iso2(poisson_model(), q_exp, F_exp, 20000, 1, off).pass);

  // int q dn = 2 is rejected before sampling
  CHECK_THROWS_AS(verify_iso2(poisson_model(), [](const JumpPoint& p) { return 2.0 * q_exp(p); },
                              F_exp, 100, 1),
                  ModelError);
}

TEST_CASE("iso3 and iso4") {
  // q = 1{r <= 1}: N(q) = N_1, n{q > 0} = 1
  auto q = [](const JumpPoint& p) { return p.time <= 1.0 ? 1.0 : 0.0; };
  const auto r = verify_iso3_iso4(poisson_model(), q, F_exp, 40000, 2, 1.0);
  CHECK(r.pass);
  // E[e^{-N_1}; N_1 > 0]
  const double oracle = std::exp(std::exp(-1.0) - 1.0) - std::exp(-1.0);
  CHECK(within(r.lhs_mean, r.lhs_se, oracle));
  CHECK(std::abs(r.extras.at("p_positive_z")) < 4.0);
  CHECK(r.extras.at("p_positive_oracle") == doctest::Approx(1.0 - std::exp(-1.0)));

  IsoOptions off;
  off.rhs_weight_scale = 1.5;
  CHECK_FALSE(verify_iso3_iso4(poisson_model(), q, F_exp, 40000, 2, 1.0, off).pass);
}

TEST_CASE("translation law with an atom at zero") {
  const double w0 = 0.3;
  auto q = [&](const JumpPoint& p) { return (1.0 - w0) * std::exp(-p.time); };
  const auto r = verify_iso1_atom(poisson_model(), q, w0, F_exp, 20000, 3);
  CHECK(r.pass);
  // E F(X + Z) = w0 E F(X) + (1 - w0) * (iso2 value)
  const double oracle =
      w0 * std::exp(std::exp(-1.0) - 1.0) + (1.0 - w0) * oracle::poisson_shift_value(kHorizon);
  CHECK(within(r.lhs_mean, r.lhs_se, oracle));

  CHECK_FALSE(verify_iso1_atom(poisson_model(), q, w0, F_exp, 20000, 3, true).pass);
  CHECK_THROWS_AS(verify_iso1_atom(poisson_model(), q, 1.5, F_exp, 10, 3), ModelError);
}

TEST_CASE("levy translation") {
  AtomicMeasure rho{FiniteIndexSet::range(1)};
  rho.add({-1.0}, 0.5);
  rho.add({2.0}, 0.5);
  LevyModel model;
  model.sigma = 0.5;
  model.drift = 0.1;
  model.rate = 2.0;
  model.law = atomic_jump_law(rho);
  model.horizon = 1.0;
  // int q = 1 over [0, 1] x (2 rho)
  auto q = [](double, double) { return 0.5; };
  auto F = [](const SamplePath& x) { return std::exp(-std::abs(x.values.back())); };
  const auto r = verify_levy_translation(model, q, F, {0.5, 1.0}, 20000, 4);
  CHECK(r.pass);
  IsoOptions off;
  off.rhs_weight_scale = 1.5;
  CHECK_FALSE(verify_levy_translation(model, q, F, {0.5, 1.0}, 20000, 4, off).pass);
}

TEST_CASE("series form agrees with the direct form") {
  LevySeriesModel model;
  model.rate = 1.0;
  model.horizon = kHorizon;
  model.law = point_jump_law(1.0, 1.0);
  const auto cfg = levy_config(model, 1000.0, {1.0});
  const auto r = verify_series_iso(cfg, q_exp, F_exp, 20000, 5);
  const auto direct = verify_iso2(poisson_model(), q_exp, F_exp, 20000, 6);
  CHECK(r.pass);
  CHECK(std::abs(r.lhs_mean - direct.lhs_mean) < 4.0 * std::hypot(r.lhs_se, direct.lhs_se));
  CHECK(within(r.rhs_mean, r.rhs_se, oracle::poisson_shift_value(kHorizon)));
  // converse: E[F(Y); Q > 0] with Q > 0 almost surely
  CHECK(std::abs(r.extras.at("converse_z")) < 4.0);

  IsoOptions off;
  off.rhs_weight_scale = 1.5;
  CHECK_FALSE(verify_series_iso(cfg, q_exp, F_exp, 20000, 5, off).pass);
}

TEST_CASE("dynkin on a two-state chain") {
  Eigen::MatrixXd P(2, 2);
  P << 0.0, 0.4, 0.4, 0.0;
  const auto chain = make_chain({"x1", "x2"}, P);
  const double alpha = 0.5;
  const double U[2][2] = {{chain.U(0, 0), chain.U(0, 1)}, {chain.U(1, 0), chain.U(1, 1)}};
  CHECK(U[0][0] == doctest::Approx(1.0 / 0.84));
  auto F = [](std::span<const double> y) { return std::exp(-y[1]); };
  const auto r = verify_dynkin(chain, 0, alpha, F, 40000, 7);
  CHECK(r.forward.pass);
  CHECK(r.converse.pass);
  // E[F(Y) Y_a] / (alpha u(a,a)) from the Laplace transform
  const double oracle = oracle::permanental_moment_2x2(U, alpha, 0.0, 1.0, 0) / (alpha * U[0][0]);
  CHECK(within(r.forward.lhs_mean, r.forward.lhs_se, oracle));
  CHECK(within(r.forward.rhs_mean, r.forward.rhs_se, oracle));
  CHECK(within(r.converse.lhs_mean, r.converse.lhs_se,
               oracle::permanental_laplace_2x2(U, alpha, 0.0, 1.0)));

  DynkinOptions off;
  off.local_time_anchor = 1;
  CHECK_FALSE(verify_dynkin(chain, 0, alpha, F, 40000, 7, off).forward.pass);
}

TEST_CASE("size bias of a gamma variable") {
  const double alpha = 1.5, c = 0.3, theta = alpha + c;
  const auto model = gamma_size_bias_model(alpha, c);
  auto F = [](std::span<const double> y) { return std::exp(-y[0]); };
  const auto r = verify_size_bias(model, 0, F, 40000, 8);
  CHECK(r.pass);
  // E[e^{-Y} Y] / theta with Y = c + G, E[G e^{-G}] = alpha 2^{-alpha-1}
  const double oracle =
      std::exp(-c) * (c * std::pow(2.0, -alpha) + alpha * std::pow(2.0, -alpha - 1.0)) / theta;
  CHECK(within(r.lhs_mean, r.lhs_se, oracle));
  CHECK(within(r.rhs_mean, r.rhs_se, oracle));
  CHECK_FALSE(verify_size_bias(model, 0, F, 40000, 8, true).pass);

  const auto drift = reconstruct_drift(model, 0, 40000, 9);
  CHECK(within(drift.mean, drift.se, c));
  // nu(dy) = alpha y^{-1} e^{-y} dy, so nu(1, inf) = alpha E1(1)
  const auto tail = reconstruct_levy_mass(
      model, [](std::span<const double> y) { return y[0] > 1.0; }, 40000, 10);
  CHECK(within(tail.mean, tail.se, alpha * boost::math::expint(1, 1.0)));
}

TEST_CASE("size bias of a bivariate gamma vector") {
  const double a0 = 0.7, a1 = 1.2, a2 = 0.9;
  const auto model = bivariate_gamma_size_bias_model(a0, a1, a2);
  REQUIRE(model.dimension() == 2);
  auto F = [](std::span<const double> y) { return std::exp(-y[0] - 2.0 * y[1]); };
  const auto r = verify_size_bias(model, 1, F, 40000, 11);
  CHECK(r.pass);
  // E[e^{-G1 - 3 G0 - 2 G2} (G2 + G0)] / (a0 + a2), E[G e^{-sG}] = a (1 + s)^{-a-1}
  const double oracle = std::pow(2.0, -a1) *
                        (a0 * std::pow(4.0, -a0 - 1.0) * std::pow(3.0, -a2) +
                         std::pow(4.0, -a0) * a2 * std::pow(3.0, -a2 - 1.0)) /
                        (a0 + a2);
  CHECK(within(r.lhs_mean, r.lhs_se, oracle));
  CHECK(within(r.rhs_mean, r.rhs_se, oracle));
}

TEST_CASE("small time limit") {
  SUBCASE("poisson jumps") {
    LevyModel model;
    model.rate = 2.0;
    model.law = point_jump_law(1.0, 1.0);
    const auto r = small_time_limit(model, [](double y) { return y >= 0.5 ? 1.0 : 0.0; }, 20000, 12);
    CHECK(r.oracle == doctest::Approx(2.0));
    CHECK(r.pass);
    CHECK(std::abs(r.extrapolated - 2.0) <= 0.05 * 2.0);
  }
  SUBCASE("brownian motion") {
    LevyModel model;
    model.sigma = 1.0;
    model.rate = 0.0;
    const auto r = small_time_limit(
        model, [](double y) { return std::min(std::pow(std::abs(y), 3.0), 1.0); }, 20000, 13);
    CHECK(r.oracle == 0.0);
    CHECK(r.pass);
    CHECK(std::abs(r.extrapolated) <= 0.01);
  }
  SUBCASE("richardson recovers a power law") {
    const std::vector<double> h{1e-1, 1e-2, 1e-3};
    std::vector<double> e, se(3, 0.0);
    for (double x : h) e.push_back(3.0 + 2.0 * std::pow(x, 1.5));
    const auto ex = richardson(h, e, se);
    CHECK(ex.value == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(ex.exponent == doctest::Approx(1.5).epsilon(1e-6));
  }
}
