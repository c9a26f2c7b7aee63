#pragma once

#include "clothsim/constitutive.hpp"

namespace clothsim {

/// Full physical parameter tuple governing material response, inertia,
/// and rest shape. rho is mass per unit rest area (unit thickness).
struct PhysParams {
  ElasticParams elastic;
  double rho = 1.0;
  double alpha = 1.0;

  void validate() const {
    elastic.validate();
    if (!(rho > 0.0)) throw ConfigError("density must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
  }
};

}  // namespace clothsim
