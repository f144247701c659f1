#include "idsim/report_json.hpp"

#include <cmath>

namespace idsim {

nlohmann::json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

namespace {

nlohmann::json numbers(const std::vector<double>& xs) {
  auto out = nlohmann::json::array();
  for (double x : xs) out.push_back(json_number(x));
  return out;
}

}  // namespace

nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["lhs_mean"] = json_number(r.lhs_mean);
  j["lhs_se"] = json_number(r.lhs_se);
  j["rhs_mean"] = json_number(r.rhs_mean);
  j["rhs_se"] = json_number(r.rhs_se);
  j["z"] = json_number(r.z);
  j["z_crit"] = json_number(r.z_crit);
  j["reps"] = r.reps;
  j["paired"] = r.paired;
  j["pass"] = r.pass;
  j["lhs_trimmed"] = json_number(r.lhs_trimmed);
  j["rhs_trimmed"] = json_number(r.rhs_trimmed);
  auto extras = nlohmann::json::object();
  for (const auto& [k, v] : r.extras) extras[k] = json_number(v);
  j["extras"] = extras;
  return j;
}

nlohmann::json to_json(const CfReport& r) {
  nlohmann::json j;
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.thetas.size(); ++i) {
    rows.push_back({{"theta", json_number(r.thetas[i])},
                    {"empirical_re", json_number(r.empirical[i].real())},
                    {"empirical_im", json_number(r.empirical[i].imag())},
                    {"oracle_re", json_number(r.oracle[i].real())},
                    {"oracle_im", json_number(r.oracle[i].imag())},
                    {"deviation", json_number(r.deviation[i])},
                    {"z", json_number(r.z[i])}});
  }
  j["grid"] = rows;
  j["max_deviation"] = json_number(r.max_deviation);
  j["tolerance"] = json_number(r.tolerance);
  j["reps"] = r.reps;
  j["pass"] = r.pass;
  return j;
}

nlohmann::json to_json(const LimitReport& r) {
  nlohmann::json j;
  j["h"] = numbers(r.h);
  j["estimate"] = numbers(r.estimate);
  j["se"] = numbers(r.se);
  j["extrapolated"] = json_number(r.extrapolated);
  j["extrapolated_se"] = json_number(r.extrapolated_se);
  j["exponent"] = json_number(r.exponent);
  j["oracle"] = json_number(r.oracle);
  j["error"] = json_number(r.error);
  j["truncation_bound"] = json_number(r.truncation_bound);
  j["rel_tol"] = json_number(r.rel_tol);
  j["abs_tol"] = json_number(r.abs_tol);
  j["pass"] = r.pass;
  return j;
}

nlohmann::json to_json(const WitnessReport& r) {
  return {{"probes", r.probes},
          {"vanishing", r.vanishing},
          {"estimate", json_number(r.interval.estimate)},
          {"lower", json_number(r.interval.lower)},
          {"upper", json_number(r.interval.upper)},
          {"threshold", json_number(r.threshold)},
          {"witnessed", r.witnessed}};
}

nlohmann::json to_json(const ValidationReport& r) {
  return {{"pass", r.pass},
          {"finite_coordinate_integrals", r.finite_coordinate_integrals},
          {"no_origin_mass", r.no_origin_mass},
          {"coordinate_integrals", numbers(r.coordinate_integrals)},
          {"origin_mass", json_number(r.origin_mass)},
          {"failures", r.failures}};
}

nlohmann::json to_json(const SamplePath& p) {
  return {{"times", numbers(p.times)}, {"values", numbers(p.values)}};
}

}  // namespace idsim
