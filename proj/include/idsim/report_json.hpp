#pragma once

#include "idsim/isomorphism.hpp"
#include "idsim/measure_core.hpp"
#include "idsim/prm.hpp"
#include "idsim/series.hpp"
#include "idsim/stats.hpp"
#include "json.hpp"

namespace idsim {

/// Finite doubles as numbers; inf / nan as the strings "inf", "-inf", "nan".
nlohmann::json json_number(double x);

nlohmann::json to_json(const IdentityReport& r);
nlohmann::json to_json(const CfReport& r);
nlohmann::json to_json(const LimitReport& r);
nlohmann::json to_json(const WitnessReport& r);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const SamplePath& p);

}  // namespace idsim
