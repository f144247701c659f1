#include "experiments.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "idsim/errors.hpp"
#include "idsim/isomorphism.hpp"
#include "idsim/measure_core.hpp"
#include "idsim/prm.hpp"
#include "idsim/report_json.hpp"
#include "idsim/representations.hpp"
#include "idsim/series.hpp"

namespace idsim::cli {

using nlohmann::json;

namespace {

// ---- config helpers -----------------------------------------------------

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw ModelError(std::string("missing required field '") + key + "'");
  return obj.at(key);
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<double> doubles(const json& arr, const char* what) {
  if (!arr.is_array()) throw ModelError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : arr) {
    if (!x.is_number()) throw ModelError(std::string(what) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CutoffFunction cutoff_from(const json& params) {
  CutoffFunction chi;
  if (params.is_object() && params.contains("cutoff"))
    chi.kind = cutoff_from_string(params.at("cutoff").get<std::string>());
  return chi;
}

std::string model_type(const json& config) {
  return require(require(config, "model"), "type").get<std::string>();
}

void expect_model(const json& config, std::initializer_list<const char*> allowed) {
  const auto type = model_type(config);
  for (const char* a : allowed)
    if (type == a) return;
  throw ModelError("model type '" + type + "' is not valid for this experiment");
}

// ---- models -------------------------------------------------------------

JumpLaw jump_law_from(const json& model) {
  if (!model.contains("jumps")) return point_jump_law(1.0, 0.0);
  const auto& j = model.at("jumps");
  if (j.contains("atoms")) {
    AtomicMeasure rho(FiniteIndexSet::range(1));
    for (const auto& atom : j.at("atoms")) {
      const auto point = doubles(require(atom, "point"), "jump point");
      if (point.size() != 1) throw ModelError("jump atoms must be one-dimensional");
      rho.add(point, require(atom, "weight").get<double>());
    }
    if (rho.total_mass() == 0.0) return point_jump_law(1.0, 0.0);
    return atomic_jump_law(rho);
  }
  return point_jump_law(value_or(j, "size", 1.0), value_or(j, "mass", 1.0));
}

LevyModel levy_from(const json& config) {
  expect_model(config, {"levy", "compound-poisson"});
  const auto& m = config.at("model");
  LevyModel model;
  model.rate = value_or(m, "rate", 1.0);
  model.sigma = value_or(m, "sigma", 0.0);
  model.drift = value_or(m, "drift", 0.0);
  model.horizon = value_or(m, "horizon", 1.0);
  model.law = jump_law_from(m);
  if (model_type(config) == "compound-poisson" && model.sigma != 0.0)
    throw ModelError("compound-poisson model has no Gaussian part");
  return model;
}

LevySeriesModel series_model_from(const json& config, const json& params) {
  const auto m = levy_from(config);
  if (m.sigma != 0.0) throw ModelError("series form covers the Poissonian part only");
  LevySeriesModel s;
  s.rate = m.rate;
  s.horizon = m.horizon;
  s.law = m.law;
  s.chi = cutoff_from(params);
  const double drift = m.drift;
  if (drift != 0.0) s.shift = [drift](double t) { return drift * t; };
  return s;
}

double jump_mass(const LevyModel& m) { return m.rate * m.law.total_mass.value_or(0.0); }

/// q(r, v) = h(r) / (rate rho(R)), h a probability density of the jump time.
std::function<double(double, double)> time_weight_from(const json& params, const LevyModel& m,
                                                       double scale = 1.0) {
  const auto& q = require(params, "q");
  const auto type = require(q, "type").get<std::string>();
  const double norm = jump_mass(m);
  if (!(norm > 0.0)) throw ModelError("q needs a model with jumps");
  if (type == "exponential_time") {
    const double mu = value_or(q, "rate", 1.0);
    return [=](double r, double) { return scale * mu * std::exp(-mu * r) / norm; };
  }
  if (type == "uniform_time") {
    const double lo = value_or(q, "lo", 0.0);
    const double hi = value_or(q, "hi", m.horizon);
    if (!(hi > lo)) throw ModelError("uniform_time needs hi > lo");
    return [=](double r, double) { return r >= lo && r <= hi ? scale / ((hi - lo) * norm) : 0.0; };
  }
  throw ModelError("unknown q type '" + type + "'");
}

VectorFunctional functional_from(const json& params, std::size_t dimension) {
  if (!params.contains("F")) return [](std::span<const double>) { return 1.0; };
  const auto& f = params.at("F");
  const auto type = require(f, "type").get<std::string>();
  if (type == "const") {
    const double v = value_or(f, "value", 1.0);
    return [v](std::span<const double>) { return v; };
  }
  if (type == "exp_linear") {
    const auto coef = doubles(require(f, "coef"), "F.coef");
    if (coef.size() != dimension)
      throw ModelError("F.coef must have one entry per coordinate");
    return [coef](std::span<const double> y) {
      double s = 0.0;
      for (std::size_t i = 0; i < coef.size(); ++i) s += coef[i] * y[i];
      return std::exp(-s);
    };
  }
  if (type == "indicator_ge") {
    const auto index = value_or<std::size_t>(f, "index", 0);
    const double threshold = value_or(f, "threshold", 1.0);
    if (index >= dimension) throw ModelError("F.index out of range");
    return [=](std::span<const double> y) { return y[index] >= threshold ? 1.0 : 0.0; };
  }
  throw ModelError("unknown functional type '" + type + "'");
}

PathFunctional path_functional_from(const json& params, std::size_t dimension) {
  auto f = functional_from(params, dimension);
  return [f](const SamplePath& p) { return f(p.values); };
}

std::vector<double> grid_from(const json& params, std::vector<double> fallback) {
  if (!params.contains("grid")) return fallback;
  auto g = doubles(params.at("grid"), "grid");
  if (g.empty()) throw ModelError("grid must not be empty");
  return g;
}

IsoOptions iso_options(const json& params) {
  IsoOptions opts;
  opts.z_crit = value_or(params, "z_crit", 4.0);
  opts.rhs_weight_scale = value_or(params, "rhs_weight_scale", 1.0);
  opts.normalization_probes = value_or<std::uint64_t>(params, "normalization_probes", 100000);
  return opts;
}

std::function<double(double)> scalar_function_from(const json& params) {
  const auto& f = require(params, "f");
  const auto type = require(f, "type").get<std::string>();
  if (type == "indicator_ge") {
    const double x0 = value_or(f, "threshold", 1.0);
    return [x0](double x) { return x >= x0 ? 1.0 : 0.0; };
  }
  if (type == "abs_cubed_capped") return [](double x) { return std::min(std::abs(x * x * x), 1.0); };
  if (type == "abs_squared_capped") return [](double x) { return std::min(x * x, 1.0); };
  throw ModelError("unknown f type '" + type + "'");
}

// ---- experiments --------------------------------------------------------

struct Context {
  const json& config;
  const json& params;
  std::uint64_t reps;
  std::uint64_t seed;
};

using Runner = std::function<RunResult(const Context&)>;

RunResult identity_result(const IdentityReport& r) {
  RunResult out;
  out.report = to_json(r);
  out.pass = r.pass;
  return out;
}

RunResult run_validate(const Context& c) {
  expect_model(c.config, {"custom-atomic"});
  const auto nu = atomic_measure_from_json(require(c.config.at("model"), "measure"));
  const auto report = validate_levy_measure(nu);
  return {to_json(report), report.pass, {}};
}

RunResult run_consistency(const Context& c) {
  expect_model(c.config, {"custom-atomic"});
  std::vector<AtomicMeasure> family;
  for (const auto& m : require(c.config.at("model"), "family"))
    family.push_back(atomic_measure_from_json(m));
  const auto r = check_consistency(family);
  json j{{"consistent", r.consistent}, {"detail", r.detail}};
  if (r.violating_subset) j["violating_subset"] = r.violating_subset->labels();
  if (r.violating_superset) j["violating_superset"] = r.violating_superset->labels();
  return {j, r.consistent, {}};
}

RunResult run_minimal_extension(const Context& c) {
  expect_model(c.config, {"custom-atomic"});
  const auto nu = atomic_measure_from_json(require(c.config.at("model"), "measure"));
  return {{{"measure", to_json(minimal_extension(nu))}}, true, {}};
}

RunResult run_char_exponent(const Context& c) {
  expect_model(c.config, {"custom-atomic"});
  const auto& m = c.config.at("model");
  FiniteLevyStructure triplet;
  auto nu = atomic_measure_from_json(require(m, "measure"));
  const auto d = nu.index_set().dimension();
  triplet.levy = nu;
  triplet.sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  if (m.contains("sigma")) {
    const auto& rows = m.at("sigma");
    if (rows.size() != d) throw ModelError("sigma must be d x d");
    for (std::size_t i = 0; i < d; ++i) {
      const auto row = doubles(rows[i], "sigma row");
      if (row.size() != d) throw ModelError("sigma must be d x d");
      for (std::size_t j = 0; j < d; ++j)
        triplet.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  triplet.shift = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  if (m.contains("shift")) {
    const auto b = doubles(m.at("shift"), "shift");
    if (b.size() != d) throw ModelError("shift must have dimension d");
    for (std::size_t i = 0; i < d; ++i) triplet.shift(static_cast<Eigen::Index>(i)) = b[i];
  }
  triplet.validate();
  const auto a = doubles(require(c.params, "a"), "a");
  const auto psi = characteristic_exponent(triplet, a, cutoff_from(c.params));
  return {{{"re", json_number(psi.real())}, {"im", json_number(psi.imag())}}, true, {}};
}

RunResult run_cf_check(const Context& c) {
  const auto model = levy_from(c.config);
  const auto rep = levy_representation(model.rate, model.horizon, model.law);
  if (!model.law.measure) throw ModelError("cf check needs an atomic jump law");
  // f(r, v) = v; its pushforward is (rate * horizon) rho
  AtomicMeasure law(FiniteIndexSet::range(1));
  for (const auto& atom : std::get<AtomicMeasure>(*model.law.measure).atoms())
    law.add(atom.point, atom.weight * model.rate * model.horizon);
  const auto thetas = c.params.contains("thetas")
                          ? doubles(c.params.at("thetas"), "thetas")
                          : std::vector<double>{-3, -2, -1, 0, 1, 2, 3};
  const auto r = empirical_cf_check(
      rep, [](const JumpPoint& p) { return p.size; }, cutoff_from(c.params), LevyMeasure{law},
      thetas, c.reps, c.seed);
  RunResult out{to_json(r), r.pass, {}};
  out.csv.header = {"theta", "empirical_re", "empirical_im", "oracle_re", "oracle_im", "z"};
  for (std::size_t i = 0; i < r.thetas.size(); ++i)
    out.csv.rows.push_back({r.thetas[i], r.empirical[i].real(), r.empirical[i].imag(),
                            r.oracle[i].real(), r.oracle[i].imag(), r.z[i]});
  return out;
}

RunResult run_mecke_palm(const Context& c) {
  const auto model = levy_from(c.config);
  const auto rep = levy_representation(model.rate, model.horizon, model.law);
  const auto h = value_or<std::string>(c.params, "h", "exp_count");
  IdentityReport r;
  if (h == "exp_count") {
    r = mecke_palm_check(
        rep,
        [](const JumpPoint&, const PointConfiguration<JumpPoint>& n) {
          return std::exp(-static_cast<double>(n.size()));
        },
        c.reps, c.seed, value_or(c.params, "z_crit", 4.0));
  } else if (h == "one") {
    r = mecke_palm_check(
        rep, [](const JumpPoint&, const PointConfiguration<JumpPoint>&) { return 1.0; }, c.reps,
        c.seed, value_or(c.params, "z_crit", 4.0));
  } else {
    throw ModelError("unknown h '" + h + "'");
  }
  return identity_result(r);
}

RunResult grid_summary(const std::vector<double>& grid, const std::vector<SeriesRealization>& runs) {
  RunResult out;
  out.csv.header = {"t", "mean", "se"};
  json rows = json::array();
  double terms = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> col(runs.size());
    for (std::size_t k = 0; k < runs.size(); ++k) col[k] = runs[k].path.values[i];
    const auto est = estimate_mean(col);
    rows.push_back({{"t", json_number(grid[i])}, {"mean", json_number(est.mean)},
                    {"se", json_number(est.se)}});
    out.csv.rows.push_back({grid[i], est.mean, est.se});
  }
  for (const auto& r : runs) terms += static_cast<double>(r.terms_used);
  out.report = {{"grid", rows},
                {"paths", runs.size()},
                {"mean_terms_used", json_number(runs.empty() ? 0.0 : terms / static_cast<double>(runs.size()))},
                {"discarded_mass", json_number(runs.empty() ? 0.0 : runs[0].discarded_mass)}};
  return out;
}

ExcursionGrid excursion_grid_from(const json& m) {
  ExcursionGrid g;
  g.m_min = value_or<std::size_t>(m, "m_min", g.m_min);
  g.m_max = value_or<std::size_t>(m, "m_max", g.m_max);
  return g;
}

LocalTimeConfig local_time_from(const json& m) {
  LocalTimeConfig lt = kSeriesLocalTime;
  lt.scale = value_or(m, "bandwidth_scale", lt.scale);
  lt.exponent = value_or(m, "bandwidth_exponent", lt.exponent);
  return lt;
}

RunResult run_generate_series(const Context& c) {
  const auto type = model_type(c.config);
  const auto& m = c.config.at("model");
  const double tau = value_or(c.params, "tau", 1000.0);
  const auto grid = grid_from(c.params, {0.0, 0.5, 1.0});
  std::vector<SeriesRealization> runs;
  if (type == "levy" || type == "compound-poisson") {
    const auto cfg = levy_config(series_model_from(c.config, c.params), tau, grid);
    runs = replicate<SeriesRealization>(c.reps, [&](std::uint64_t i) {
      Rng rng = Rng::stream(c.seed, i);
      return generate_series(cfg, rng);
    });
  } else if (type == "feller") {
    const auto cfg = feller_config(value_or(m, "a", 1.0), value_or(m, "sigma", 2.0),
                                   LengthTilt::standard_tilt(), tau, grid,
                                   excursion_grid_from(m), local_time_from(m),
                                   value_or(c.params, "sample_tail", true));
    runs = replicate<SeriesRealization>(c.reps, [&](std::uint64_t i) {
      Rng rng = Rng::stream(c.seed, i);
      return generate_series(cfg, rng);
    });
  } else if (type == "besq") {
    const auto cfg = besq_config(value_or(m, "beta", 1.0), tau, grid, LengthTilt::standard_tilt(),
                                 excursion_grid_from(m), local_time_from(m),
                                 value_or(c.params, "sample_tail", true));
    runs = replicate<SeriesRealization>(c.reps, [&](std::uint64_t i) {
      Rng rng = Rng::stream(c.seed, i);
      return generate_series(cfg, rng);
    });
  } else {
    throw ModelError("model type '" + type + "' has no series representation here");
  }
  return grid_summary(grid, runs);
}

RunResult run_compound_poisson(const Context& c) {
  const auto model = levy_from(c.config);
  if (model.sigma != 0.0) throw ModelError("compound Poisson sampling has no Gaussian part");
  const auto grid = grid_from(c.params, {0.0, 0.5, 1.0});
  const auto rep = levy_representation(model.rate, model.horizon, model.law);
  const double theta = rep.finite_mass.value_or(0.0);
  KernelPathSampler kernel = [&](Rng& rng, std::span<const double> g, std::span<double> out) {
    const auto p = rep.sample(rng);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = levy_kernel(g[i], p);
  };
  const auto runs = replicate<SeriesRealization>(c.reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(c.seed, i);
    SeriesRealization r;
    r.path = compound_poisson_sample(kernel, theta, grid, rng);
    for (std::size_t k = 0; k < grid.size(); ++k) r.path.values[k] += model.drift * grid[k];
    return r;
  });
  return grid_summary(grid, runs);
}

RunResult run_iso2(const Context& c) {
  const auto model = levy_from(c.config);
  const auto grid = grid_from(c.params, {1.0});
  const auto pm = levy_process_model(model, grid);
  const auto q = time_weight_from(c.params, model);
  return identity_result(verify_iso2(
      pm, [&](const JumpPoint& p) { return q(p.time, p.size); },
      path_functional_from(c.params, grid.size()), c.reps, c.seed, iso_options(c.params)));
}

RunResult run_iso3(const Context& c) {
  const auto model = levy_from(c.config);
  const auto grid = grid_from(c.params, {1.0});
  const auto pm = levy_process_model(model, grid);
  const auto q = time_weight_from(c.params, model);
  std::optional<double> positive;
  if (c.params.contains("positive_mass")) positive = c.params.at("positive_mass").get<double>();
  return identity_result(verify_iso3_iso4(
      pm, [&](const JumpPoint& p) { return q(p.time, p.size); },
      path_functional_from(c.params, grid.size()), c.reps, c.seed, positive,
      iso_options(c.params)));
}

RunResult run_iso1_atom(const Context& c) {
  const auto model = levy_from(c.config);
  const auto grid = grid_from(c.params, {1.0});
  const auto pm = levy_process_model(model, grid);
  const double atom = value_or(c.params, "atom_weight", 0.0);
  const auto q = time_weight_from(c.params, model, 1.0 - atom);
  return identity_result(verify_iso1_atom(
      pm, [&](const JumpPoint& p) { return q(p.time, p.size); }, atom,
      path_functional_from(c.params, grid.size()), c.reps, c.seed,
      value_or(c.params, "drop_atom", false), iso_options(c.params)));
}

RunResult run_levy_translation(const Context& c) {
  const auto model = levy_from(c.config);
  const auto grid = grid_from(c.params, {1.0});
  return identity_result(verify_levy_translation(model, time_weight_from(c.params, model),
                                                 path_functional_from(c.params, grid.size()),
                                                 grid, c.reps, c.seed, iso_options(c.params)));
}

RunResult run_series_iso(const Context& c) {
  const auto model = levy_from(c.config);
  const auto grid = grid_from(c.params, {1.0});
  const auto cfg = levy_config(series_model_from(c.config, c.params),
                               value_or(c.params, "tau", 1000.0), grid);
  const auto q = time_weight_from(c.params, model);
  return identity_result(verify_series_iso(
      cfg, [&](const JumpPoint& p) { return q(p.time, p.size); },
      path_functional_from(c.params, grid.size()), c.reps, c.seed, iso_options(c.params)));
}

RunResult run_dynkin(const Context& c) {
  expect_model(c.config, {"markov-chain"});
  const auto chain = chain_from_json(c.config.at("model"));
  const auto anchor = chain.index_of(value_or<std::string>(c.params, "anchor", chain.states[0]));
  DynkinOptions opts;
  opts.z_crit = value_or(c.params, "z_crit", 4.0);
  if (c.params.contains("local_time_anchor"))
    opts.local_time_anchor = chain.index_of(c.params.at("local_time_anchor").get<std::string>());
  const auto r = verify_dynkin(chain, anchor, value_or(c.params, "alpha", 0.5),
                               functional_from(c.params, chain.size()), c.reps, c.seed, opts);
  RunResult out;
  out.report = {{"forward", to_json(r.forward)}, {"converse", to_json(r.converse)}};
  out.pass = r.forward.pass && r.converse.pass;
  return out;
}

RunResult run_size_bias(const Context& c) {
  expect_model(c.config, {"gamma-vector"});
  const auto& m = c.config.at("model");
  SizeBiasModel model;
  if (m.contains("alpha0")) {
    model = bivariate_gamma_size_bias_model(value_or(m, "alpha0", 0.0), value_or(m, "alpha1", 0.0),
                                            value_or(m, "alpha2", 0.0));
  } else {
    model = gamma_size_bias_model(value_or(m, "alpha", 1.0), value_or(m, "drift", 0.0));
  }
  return identity_result(verify_size_bias(model, value_or<std::size_t>(c.params, "k", 0),
                                          functional_from(c.params, model.dimension()), c.reps,
                                          c.seed, value_or(c.params, "drop_atom", false),
                                          iso_options(c.params)));
}

RunResult run_permanental_laplace(const Context& c) {
  expect_model(c.config, {"permanental", "markov-chain"});
  const auto model = permanental_from_json(c.config.at("model"));
  const auto ys = replicate<std::vector<double>>(c.reps, [&](std::uint64_t i) {
    Rng rng = Rng::stream(c.seed, i);
    return sample_permanental(model, rng);
  });
  const double z_crit = value_or(c.params, "z_crit", 4.0);
  RunResult out;
  out.report = json::array();
  out.csv.header = {"point", "empirical", "se", "oracle", "z"};
  for (const auto& s_json : require(c.params, "s_grid")) {
    const auto s = doubles(s_json, "s");
    const double oracle = permanental_laplace(model.U, model.alpha, s);
    std::vector<double> v(c.reps);
    for (std::uint64_t i = 0; i < c.reps; ++i) {
      double e = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) e += s[j] * ys[i][j];
      v[i] = std::exp(-e);
    }
    const std::vector<double> exact{oracle};
    auto r = compare_independent("permanental_laplace", v, exact, z_crit);
    r.rhs_se = 0.0;
    r.z = z_statistic(r.lhs_mean, r.lhs_se, oracle, 0.0);
    r.pass = std::abs(r.z) < z_crit;
    out.pass = out.pass && r.pass;
    auto j = to_json(r);
    j["s"] = s;
    out.report.push_back(j);
    out.csv.rows.push_back({static_cast<double>(out.csv.rows.size()), r.lhs_mean, r.lhs_se,
                            oracle, r.z});
  }
  return out;
}

RunResult run_small_time(const Context& c) {
  const auto model = levy_from(c.config);
  LimitOptions opts;
  if (c.params.contains("h_ladder")) opts.h_ladder = doubles(c.params.at("h_ladder"), "h_ladder");
  opts.rel_tol = value_or(c.params, "rel_tol", opts.rel_tol);
  opts.abs_tol = value_or(c.params, "abs_tol", opts.abs_tol);
  const auto r = small_time_limit(model, scalar_function_from(c.params), c.reps, c.seed, opts);
  RunResult out{to_json(r), r.pass, {}};
  out.csv.header = {"h", "estimate", "se"};
  for (std::size_t i = 0; i < r.h.size(); ++i) out.csv.rows.push_back({r.h[i], r.estimate[i], r.se[i]});
  return out;
}

RunResult run_witness(const Context& c) {
  const auto model = levy_from(c.config);
  const auto rep = levy_representation(model.rate, model.horizon, model.law);
  const auto T0 = c.params.contains("T0") ? doubles(c.params.at("T0"), "T0")
                                          : std::vector<double>{model.horizon};
  Rng rng = Rng::stream(c.seed, 0);
  const auto r = sigma_finiteness_witness(rep, T0, value_or<std::uint64_t>(c.params, "probes", c.reps),
                                          rng, value_or(c.params, "threshold", 1e-3));
  return {to_json(r), r.witnessed, {}};
}

struct Entry {
  ExperimentInfo info;
  Runner run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"validate_levy_measure", "custom-atomic", "model.measure"}, run_validate},
      {{"check_consistency", "custom-atomic", "model.family"}, run_consistency},
      {{"minimal_extension", "custom-atomic", "model.measure"}, run_minimal_extension},
      {{"characteristic_exponent", "custom-atomic", "a, cutoff?; model.sigma?, model.shift?"},
       run_char_exponent},
      {{"sigma_finiteness_witness", "levy", "T0, probes?, threshold?"}, run_witness},
      {{"empirical_cf_check", "levy|compound-poisson", "thetas?, cutoff?"}, run_cf_check},
      {{"mecke_palm_check", "levy|compound-poisson", "h (exp_count|one)"}, run_mecke_palm},
      {{"compound_poisson_sample", "levy|compound-poisson", "grid"}, run_compound_poisson},
      {{"generate_series", "levy|compound-poisson|feller|besq", "grid, tau"}, run_generate_series},
      {{"verify_iso2", "levy|compound-poisson", "q, F, grid, rhs_weight_scale?"}, run_iso2},
      {{"verify_iso3_iso4", "levy|compound-poisson", "q, F, grid, positive_mass?"}, run_iso3},
      {{"verify_iso1_atom", "levy|compound-poisson", "q, atom_weight, F, grid, drop_atom?"},
       run_iso1_atom},
      {{"verify_levy_translation", "levy", "q, F, grid"}, run_levy_translation},
      {{"verify_series_iso", "levy|compound-poisson", "q, F, grid, tau"}, run_series_iso},
      {{"verify_dynkin", "markov-chain", "anchor, alpha, F, local_time_anchor?"}, run_dynkin},
      {{"verify_size_bias", "gamma-vector", "k, F, drop_atom?"}, run_size_bias},
      {{"verify_permanental_laplace", "permanental|markov-chain", "s_grid"},
       run_permanental_laplace},
      {{"small_time_limit", "levy|compound-poisson", "f, h_ladder?, rel_tol?, abs_tol?"},
       run_small_time},
  };
  return entries;
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

std::string list_experiments() {
  std::ostringstream os;
  std::size_t w = 0;
  for (const auto& e : experiments()) w = std::max(w, e.name.size());
  for (const auto& e : experiments()) {
    os << e.name << std::string(w + 2 - e.name.size(), ' ') << e.models;
    os << "  [" << e.params << "]\n";
  }
  return os.str();
}

RunResult run_experiment(const json& config) {
  if (!config.is_object()) throw ModelError("config must be a JSON object");
  const auto name = require(config, "experiment").get<std::string>();
  const auto reps = value_or<std::uint64_t>(config, "reps", 1);
  if (reps < 1) throw ModelError("reps must be >= 1");
  const auto seed = value_or<std::uint64_t>(config, "seed", 0);
  static const json empty = json::object();
  const json& params = config.contains("params") ? config.at("params") : empty;
  for (const auto& e : registry())
    if (e.info.name == name) return e.run(Context{config, params, reps, seed});
  throw ModelError("unknown experiment '" + name + "'");
}

std::string version() { return "idsim 0.1.0"; }

json make_report(const json& config, const RunResult& result, const std::string& timestamp) {
  return {{"version", version()},
          {"config", config},
          {"seed", value_or<std::uint64_t>(config, "seed", 0)},
          {"pass", result.pass},
          {"result", result.report},
          {"timestamp", timestamp}};
}

}  // namespace idsim::cli
