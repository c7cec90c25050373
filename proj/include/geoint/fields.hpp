// SPDX-License-Identifier: Apache-2.0
//
// Magnetic field models B(x, y) on the plane and the induced grad-B drift.

#ifndef GEOINT_FIELDS_HPP
#define GEOINT_FIELDS_HPP

#include <concepts>
#include <string>
#include <variant>

#include "geoint/core.hpp"
#include "geoint/errors.hpp"

namespace geoint {

/// A field model exposes B and its analytic first and second derivatives.
/// Models are immutable values; `value` may return a non-positive number,
/// the checked accessors below reject it.
template <class F>
concept MagneticField = requires(const F& f, Vec2 q) {
  { f.value(q) } -> std::convertible_to<double>;
  { f.gradient(q) } -> std::convertible_to<Vec2>;
  { f.hessian(q) } -> std::convertible_to<Mat2>;
};

/// B = B0 (1 + alpha |q|^2). Circular drift orbits.
struct QuadraticField {
  double b0 = 1.0;
  double alpha = 0.001;

  double value(Vec2 q) const { return b0 * (1.0 + alpha * dot(q, q)); }
  Vec2 gradient(Vec2 q) const { return (2.0 * alpha * b0) * q; }
  Mat2 hessian(Vec2) const {
    const double c = 2.0 * alpha * b0;
    return make_mat2(c, 0.0, 0.0, c);
  }
};

/// B = 2 + y^2 - x^2 + x^4 / 4. The level set B = 2 is a figure eight
/// through the saddle at the origin.
struct FigureEightField {
  double value(Vec2 q) const {
    const double x2 = q.x * q.x;
    return 2.0 + q.y * q.y - x2 + 0.25 * x2 * x2;
  }
  Vec2 gradient(Vec2 q) const { return {-2.0 * q.x + q.x * q.x * q.x, 2.0 * q.y}; }
  Mat2 hessian(Vec2 q) const { return make_mat2(-2.0 + 3.0 * q.x * q.x, 0.0, 0.0, 2.0); }
};

static_assert(MagneticField<QuadraticField>);
static_assert(MagneticField<FigureEightField>);

/// Magnetic moment and time scaling. The drift uses mu * tau throughout.
struct DriftParams {
  double mu = 1.0;
  double tau = 1.0;

  double mu_eff() const { return mu * tau; }
};

template <MagneticField F>
double b_value(const F& field, Vec2 q) {
  const double b = field.value(q);
  if (!(b > 0.0))
    throw DomainError("magnetic field B = " + std::to_string(b) + " <= 0 at (" + std::to_string(q.x) +
                      ", " + std::to_string(q.y) + ")");
  return b;
}

template <MagneticField F>
Vec2 b_grad(const F& field, Vec2 q) {
  return field.gradient(q);
}

template <MagneticField F>
Mat2 b_hess(const F& field, Vec2 q) {
  return field.hessian(q);
}

/// Everything the stepper needs from the field at one point.
struct DriftSample {
  double b = 0.0;
  Vec2 grad_b;
  Vec2 drift;      // X_H
  Mat2 drift_jac;  // d X_H / dq, row i = gradient of component i
};

template <MagneticField F>
DriftSample sample_drift(const F& field, const DriftParams& dp, Vec2 q) {
  DriftSample s;
  s.b = b_value(field, q);
  s.grad_b = field.gradient(q);
  const double m = dp.mu_eff();
  const Vec2 grad_log = s.grad_b / s.b;
  s.drift = m * quarter_turn(grad_log);
  const Mat2 hess_log = field.hessian(q) * (1.0 / s.b) - outer(grad_log, grad_log);
  s.drift_jac = m * (kQuarterTurn * hess_log);
  return s;
}

/// grad-B drift X_H = mu_eff R_{pi/2} grad ln B.
template <MagneticField F>
Vec2 drift_velocity(const F& field, const DriftParams& dp, Vec2 q) {
  const double b = b_value(field, q);
  return dp.mu_eff() * quarter_turn(field.gradient(q) / b);
}

template <MagneticField F>
Mat2 drift_jacobian(const F& field, const DriftParams& dp, Vec2 q) {
  return sample_drift(field, dp, q).drift_jac;
}

/// Runtime-selected field for the command line.
using AnyField = std::variant<QuadraticField, FigureEightField>;

}  // namespace geoint

#endif  // GEOINT_FIELDS_HPP
