#pragma once

#include <stdexcept>
#include <string>

namespace idsim {

/// Invalid model, parameter or precondition.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature did not reach its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A truncated series could not represent the requested window.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace idsim
