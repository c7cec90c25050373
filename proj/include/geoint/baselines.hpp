// SPDX-License-Identifier: Apache-2.0

#ifndef GEOINT_BASELINES_HPP
#define GEOINT_BASELINES_HPP

#include "geoint/core.hpp"
#include "geoint/fields.hpp"

namespace geoint {

/// Classical fourth-order Runge-Kutta step for the reduced flow
/// dq/dt = X_H(q). Throws DomainError if a stage leaves B > 0.
template <MagneticField F>
Vec2 rk4_step(const F& field, const DriftParams& dp, Vec2 q, double h) {
  const Vec2 k1 = drift_velocity(field, dp, q);
  const Vec2 k2 = drift_velocity(field, dp, q + (0.5 * h) * k1);
  const Vec2 k3 = drift_velocity(field, dp, q + (0.5 * h) * k2);
  const Vec2 k4 = drift_velocity(field, dp, q + h * k3);
  return q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace geoint

#endif  // GEOINT_BASELINES_HPP
