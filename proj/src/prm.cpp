#include "idsim/prm.hpp"

#include <sstream>

namespace idsim {

double SamplePath::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] == t) return values[i];
  std::ostringstream msg;
  msg << "time " << t << " is not on the path grid";
  throw ModelError(msg.str());
}

void require_finite_mass(const std::optional<double>& mass) {
  if (!mass || !(*mass >= 0.0) || !std::isfinite(*mass))
    throw ModelError("representation has no finite total mass");
}

void require_constant_density(double g, double mass) {
  if (mass > 0.0 && std::abs(g * mass - 1.0) > 1e-9)
    throw ModelError("finite-mass sampler must draw from n / theta (g = 1/theta)");
}

std::function<double(CutoffFunction)> compensator_from_law(LevyMeasure law_of_f) {
  return [law = std::move(law_of_f)](CutoffFunction chi) { return truncated_mean(law, chi); };
}

}  // namespace idsim
