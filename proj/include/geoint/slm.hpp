// SPDX-License-Identifier: Apache-2.0
//
// Symplectic Lorentz map for planar guiding-center motion.
//
// The map (q, v) -> (qbar, vbar) on the tangent bundle of the plane is
// generated by
//
//   S(q, qbar) = int_q^qbar alpha + Sigma((q + qbar) / 2, qbar - q),
//
// with dalpha = B dx^dy and the conformal metric g_q(v, w) = B(q) v.w. It
// preserves Omega* = -B dx^dy - hbar^2 d(B v.dq). The implicit relation for
// the chord xi = qbar - q is solved by fixed-point iteration on the 2x2
// linear form
//
//   [k B(eta) / 2 - I0 R] xi = k B(eta) hbar X_H / 2 + hbar^2 B(eta) X_H
//                              - hbar^2 B(q) v - dSigma/deta / 2,
//
// where k = sin(theta0) / (1 - cos(theta0)), R is the quarter turn and
// I0, I1 are the (1 - lambda) and lambda weighted chord integrals of B.

#ifndef GEOINT_SLM_HPP
#define GEOINT_SLM_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "geoint/core.hpp"
#include "geoint/errors.hpp"
#include "geoint/fields.hpp"

namespace geoint {

/// Point (q, v) of the tangent bundle.
struct GCState {
  Vec2 q;
  Vec2 v;

  friend bool operator==(const GCState&, const GCState&) = default;
};

struct SlmParams {
  double hbar = 0.1;
  double theta0 = 2.0;
  DriftParams drift;
  double fp_tol = 1e-12;
  std::size_t fp_max_iter = 200;

  /// sin(theta0) / (1 - cos(theta0)) = cot(theta0 / 2).
  double cot_half() const { return std::sin(theta0) / (1.0 - std::cos(theta0)); }

  void validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("hbar must be > 0");
    if (!std::isfinite(theta0) || std::abs(std::sin(theta0)) < 1e-12)
      throw DomainError("theta0 must avoid 0 and pi (mod 2 pi)");
    if (!(fp_tol > 0.0)) throw DomainError("fp_tol must be > 0");
    if (fp_max_iter == 0) throw DomainError("fp_max_iter must be >= 1");
    if (!(drift.mu_eff() > 0.0)) throw DomainError("mu * tau must be > 0");
  }
};

struct SigmaDerivatives {
  Vec2 d_eta;
  Vec2 d_xi;
};

struct ChordIntegrals {
  double i0 = 0.0;  // int (1 - lambda) B(q + lambda xi)
  double i1 = 0.0;  // int lambda B(q + lambda xi)
};

struct SlmSolveReport {
  Vec2 eta;
  Vec2 xi;
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  /// Residuals of the last (up to) three sweeps, oldest first.
  std::array<double, 3> last_residuals{};
  std::size_t n_last = 0;
  ChordIntegrals chord;
  DriftSample at_eta;
};

namespace detail {

inline double sigma_from_sample(const DriftSample& s, Vec2 xi, const SlmParams& p) {
  const double h = p.hbar;
  const double k = p.cot_half();
  const Vec2 d = xi - h * s.drift;
  return -h * p.drift.mu_eff() * s.b + h * h * s.b * dot(s.drift, xi) - 0.25 * k * s.b * dot(d, d);
}

inline SigmaDerivatives sigma_derivatives_from_sample(const DriftSample& s, Vec2 xi, const SlmParams& p) {
  const double h = p.hbar;
  const double k = p.cot_half();
  const Vec2 d = xi - h * s.drift;
  const Mat2 jac_t = s.drift_jac.transposed();
  SigmaDerivatives out;
  out.d_eta = (-h * p.drift.mu_eff()) * s.grad_b + (h * h * dot(s.drift, xi)) * s.grad_b +
              (h * h * s.b) * (jac_t * xi) - (0.25 * k * dot(d, d)) * s.grad_b +
              (0.5 * k * s.b * h) * (jac_t * d);
  out.d_xi = (h * h * s.b) * s.drift - (0.5 * k * s.b) * d;
  return out;
}

}  // namespace detail

/// Sigma(eta, xi) with mu replaced by mu * tau.
template <MagneticField F>
double sigma_value(const F& field, Vec2 eta, Vec2 xi, const SlmParams& p) {
  return detail::sigma_from_sample(sample_drift(field, p.drift, eta), xi, p);
}

/// Analytic partial derivatives of Sigma. The eta-derivative of X_H . w is
/// (dX_H/deta)^T w.
template <MagneticField F>
SigmaDerivatives sigma_derivatives(const F& field, Vec2 eta, Vec2 xi, const SlmParams& p) {
  return detail::sigma_derivatives_from_sample(sample_drift(field, p.drift, eta), xi, p);
}

template <MagneticField F>
ChordIntegrals chord_integrals(const F& field, Vec2 q, Vec2 xi) {
  const QuadratureRule& rule = chord_rule();
  ChordIntegrals c;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double lam = rule.nodes[i];
    const double b = b_value(field, q + lam * xi);
    c.i0 += rule.weights[i] * (1.0 - lam) * b;
    c.i1 += rule.weights[i] * lam * b;
  }
  return c;
}

/// Solves the implicit chord equation. Starts from xi = hbar X_H(q); each
/// sweep assembles the 2x2 operator and right-hand side at the current
/// iterate and solves it. Once the residual is within tolerance one more
/// sweep is taken and kept if it lowers the residual, so re-substitution of
/// the accepted step stays below tolerance after rounding.
template <MagneticField F>
SlmSolveReport solve_xi(const F& field, const GCState& s, const SlmParams& p) {
  const double h = p.hbar;
  const double k = p.cot_half();
  const double b_q = b_value(field, s.q);
  const Vec2 rhs_v = (h * h * b_q) * s.v;

  struct Linearization {
    SlmSolveReport state;
    Mat2 op;
    Vec2 rhs;
    double residual;
  };
  auto assemble = [&](const SlmSolveReport& base, Vec2 xi) {
    Linearization l{base, {}, {}, 0.0};
    l.state.xi = xi;
    l.state.eta = s.q + 0.5 * xi;
    l.state.at_eta = sample_drift(field, p.drift, l.state.eta);
    l.state.chord = chord_integrals(field, s.q, xi);
    const DriftSample& at = l.state.at_eta;
    const SigmaDerivatives ds = detail::sigma_derivatives_from_sample(at, xi, p);
    const double diag = 0.5 * k * at.b;
    l.op = Mat2::identity() * diag - kQuarterTurn * l.state.chord.i0;
    l.rhs = (diag * h) * at.drift + (h * h * at.b) * at.drift - rhs_v - 0.5 * ds.d_eta;
    l.residual = norm_inf(l.op * xi - l.rhs);
    return l;
  };
  auto push_residual = [](SlmSolveReport& rep, double r) {
    if (rep.n_last < 3) {
      rep.last_residuals[rep.n_last++] = r;
    } else {
      rep.last_residuals = {rep.last_residuals[1], rep.last_residuals[2], r};
    }
  };

  SlmSolveReport rep;
  Vec2 xi = h * drift_velocity(field, p.drift, s.q);
  double residual = INFINITY;
  for (std::size_t it = 1; it <= p.fp_max_iter; ++it) {
    Linearization l = assemble(rep, xi);
    rep = l.state;
    residual = l.residual;
    rep.iterations = it;
    push_residual(rep, residual);
    if (residual <= p.fp_tol) {
      rep.residual_norm = residual;
      const Vec2 polished = solve(l.op, l.rhs);
      if (is_finite(polished)) {
        Linearization lp = assemble(rep, polished);
        if (lp.residual < residual) {
          rep = lp.state;
          rep.residual_norm = lp.residual;
          push_residual(rep, lp.residual);
        }
      }
      return rep;
    }
    const Vec2 next = solve(l.op, l.rhs);
    if (!is_finite(next)) throw NonConvergence(it, residual);
    xi = next;
  }
  throw NonConvergence(p.fp_max_iter, residual);
}

/// Updated fiber velocity from the sum form of the two generating relations.
inline Vec2 slm_velocity_update(const SlmSolveReport& rep, const GCState& s, double b_q, double b_qbar,
                                const SlmParams& p) {
  const double h = p.hbar;
  const double k = p.cot_half();
  const DriftSample& at = rep.at_eta;
  const Vec2 d = rep.xi - h * at.drift;
  const Vec2 sum = (rep.chord.i0 - rep.chord.i1) * quarter_turn(rep.xi) + (2.0 * h * h * at.b) * at.drift -
                   (k * at.b) * d - (h * h * b_q) * s.v;
  return sum / (h * h * b_qbar);
}

struct SlmStepResult {
  GCState state;
  SlmSolveReport report;
};

template <MagneticField F>
SlmStepResult slm_step_report(const F& field, const GCState& s, const SlmParams& p) {
  SlmStepResult out;
  out.report = solve_xi(field, s, p);
  const double b_q = b_value(field, s.q);
  out.state.q = s.q + out.report.xi;
  const double b_qbar = b_value(field, out.state.q);
  out.state.v = slm_velocity_update(out.report, s, b_q, b_qbar, p);
  return out;
}

/// One step of the symplectic Lorentz map.
template <MagneticField F>
GCState slm_step(const F& field, const GCState& s, const SlmParams& p) {
  return slm_step_report(field, s, p).state;
}

struct SlmResiduals {
  double forward = 0.0;   // hbar^2 B(qbar) vbar relation
  double backward = 0.0;  // hbar^2 B(q) v relation

  double max() const { return forward > backward ? forward : backward; }
};

/// Re-substitutes (s, next) into the two generating relations in their
/// original form and returns the infinity-norm residuals.
template <MagneticField F>
SlmResiduals slm_residuals(const F& field, const GCState& s, const GCState& next, const SlmParams& p) {
  const double h = p.hbar;
  const Vec2 xi = next.q - s.q;
  const Vec2 eta = 0.5 * (s.q + next.q);
  const ChordIntegrals c = chord_integrals(field, s.q, xi);
  const SigmaDerivatives ds = sigma_derivatives(field, eta, xi, p);
  const Vec2 rxi = quarter_turn(xi);
  SlmResiduals r;
  r.forward = norm_inf((h * h * b_value(field, next.q)) * next.v - (-c.i1 * rxi + 0.5 * ds.d_eta + ds.d_xi));
  r.backward = norm_inf((h * h * b_value(field, s.q)) * s.v - (c.i0 * rxi - 0.5 * ds.d_eta + ds.d_xi));
  return r;
}

}  // namespace geoint

#endif  // GEOINT_SLM_HPP
