// SPDX-License-Identifier: Apache-2.0
//
// Fast-slow integrators for a unit-frequency oscillator (q, p) coupled to a
// planar two-body system (Q, P) through
//
//   H = (p^2 + q^2) / 2 + eps (|P|^2 / 2 + V(Q) + q^2 W(Q)).
//
// fs_step is the nearly-periodic map generated by a Type I generating
// function: the oscillator is rotated by theta0 per step while the slow
// variables take an implicit-midpoint step of size hbar = eps h.
// stiff_midpoint_step is the plain implicit midpoint rule on the full flow.

#ifndef GEOINT_FASTSLOW_HPP
#define GEOINT_FASTSLOW_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>

#include "geoint/errors.hpp"

namespace geoint {

/// Positions or momenta of two planar bodies: (x1, y1, x2, y2).
using Vec4 = std::array<double, 4>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }
inline Vec4 operator-(const Vec4& a, const Vec4& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }
inline Vec4 operator*(double s, const Vec4& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
inline double norm_inf(const Vec4& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2]), std::abs(a[3])});
}
inline double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

struct FsState {
  double q = 1.0;
  double p = 0.0;
  Vec4 Q{};
  Vec4 P{};

  friend bool operator==(const FsState&, const FsState&) = default;
};

struct FsParams {
  double hbar = 0.1;
  double theta0 = 2.0;
  double eps = 0.001;
  double fp_tol = 1e-12;
  std::size_t fp_max_iter = 200;

  /// Physical step h = hbar / eps.
  double step_size() const { return hbar / eps; }

  void validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("hbar must be > 0");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
    if (!std::isfinite(theta0)) throw DomainError("theta0 must be finite");
    if (!(fp_tol > 0.0)) throw DomainError("fp_tol must be > 0");
    if (fp_max_iter == 0) throw DomainError("fp_max_iter must be >= 1");
  }
};

struct PotentialValues {
  double v = 0.0;
  Vec4 grad_v{};
  double w = 0.0;
  Vec4 grad_w{};
};

template <class P>
concept SlowPotential = requires(const P& pot, const Vec4& Q) {
  { pot.evaluate(Q) } -> std::convertible_to<PotentialValues>;
};

inline constexpr double kSeparationGuard = 1e-9;

/// V = -1/|Q1| - 1/|Q2|, W = -1/|Q1 - Q2|.
inline PotentialValues gravity_potentials(const Vec4& Q) {
  const double x1 = Q[0], y1 = Q[1], x2 = Q[2], y2 = Q[3];
  const double r1 = std::hypot(x1, y1);
  const double r2 = std::hypot(x2, y2);
  const double r12 = std::hypot(x1 - x2, y1 - y2);
  if (!(r1 > kSeparationGuard) || !(r2 > kSeparationGuard) || !(r12 > kSeparationGuard))
    throw SingularConfiguration("gravitational separation below 1e-9 (|Q1| = " + std::to_string(r1) +
                                ", |Q2| = " + std::to_string(r2) + ", |Q1-Q2| = " + std::to_string(r12) + ")");
  PotentialValues out;
  const double c1 = 1.0 / (r1 * r1 * r1);
  const double c2 = 1.0 / (r2 * r2 * r2);
  const double c12 = 1.0 / (r12 * r12 * r12);
  out.v = -1.0 / r1 - 1.0 / r2;
  out.grad_v = {c1 * x1, c1 * y1, c2 * x2, c2 * y2};
  out.w = -1.0 / r12;
  out.grad_w = {c12 * (x1 - x2), c12 * (y1 - y2), -c12 * (x1 - x2), -c12 * (y1 - y2)};
  return out;
}

struct TwoBodyGravity {
  PotentialValues evaluate(const Vec4& Q) const { return gravity_potentials(Q); }
};

struct ZeroPotential {
  PotentialValues evaluate(const Vec4&) const { return {}; }
};

/// V = |Q|^2 / 2, W = 0. Linear forces; used to check the slow solver
/// against closed forms.
struct HarmonicPotential {
  PotentialValues evaluate(const Vec4& Q) const {
    PotentialValues out;
    out.v = 0.5 * dot(Q, Q);
    out.grad_v = Q;
    return out;
  }
};

static_assert(SlowPotential<TwoBodyGravity>);
static_assert(SlowPotential<ZeroPotential>);
static_assert(SlowPotential<HarmonicPotential>);

using AnyPotential = std::variant<TwoBodyGravity, ZeroPotential, HarmonicPotential>;

/// cos and sin with exact values at integer multiples of pi/2, so that the
/// resonant angle theta0 = pi flips q exactly.
inline std::array<double, 2> cos_sin_snapped(double theta) {
  const double quarters = theta / (0.5 * std::numbers::pi);
  const double nearest = std::round(quarters);
  if (std::abs(quarters - nearest) < 1e-12) {
    switch (static_cast<long long>(nearest) & 3) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(theta), std::sin(theta)};
}

struct FsSlowResult {
  Vec4 Qbar{};
  Vec4 Pbar{};
  std::size_t iterations = 0;
  double residual = 0.0;
  PotentialValues at_mid;
};

/// Residual of the slow midpoint pair
///   Pbar - P = -hbar grad V(m) - hbar q^2 grad W(m),
///   Qbar - Q = hbar (P + Pbar) / 2,       m = (Q + Qbar) / 2.
inline double fs_slow_residual(const FsState& s, const Vec4& Qbar, const Vec4& Pbar, const PotentialValues& at_mid,
                               double hbar) {
  const double q2 = s.q * s.q;
  const Vec4 r1 = (Pbar - s.P) + hbar * (at_mid.grad_v + q2 * at_mid.grad_w);
  const Vec4 r2 = (Qbar - s.Q) - (0.5 * hbar) * (s.P + Pbar);
  return std::max(norm_inf(r1), norm_inf(r2));
}

/// Implicit-midpoint slow update driven by the current fast position q.
template <SlowPotential Pot>
FsSlowResult fs_slow_solve(const FsState& s, const Pot& pot, const FsParams& p) {
  const double h = p.hbar;
  const double q2 = s.q * s.q;
  FsSlowResult out;
  out.Qbar = s.Q + h * s.P;
  out.Pbar = s.P;
  double residual = INFINITY;
  for (std::size_t it = 1; it <= p.fp_max_iter; ++it) {
    const Vec4 mid = 0.5 * (s.Q + out.Qbar);
    out.at_mid = pot.evaluate(mid);
    residual = fs_slow_residual(s, out.Qbar, out.Pbar, out.at_mid, h);
    out.iterations = it;
    if (residual <= p.fp_tol) {
      out.residual = residual;
      return out;
    }
    if (!std::isfinite(residual)) throw NonConvergence(it, residual);
    out.Pbar = s.P - h * (out.at_mid.grad_v + q2 * out.at_mid.grad_w);
    out.Qbar = s.Q + (0.5 * h) * (s.P + out.Pbar);
  }
  throw NonConvergence(p.fp_max_iter, residual);
}

struct FsStepResult {
  FsState state;
  FsSlowResult slow;
};

template <SlowPotential Pot>
FsStepResult fs_step_report(const FsState& s, const Pot& pot, const FsParams& p) {
  FsStepResult out;
  out.slow = fs_slow_solve(s, pot, p);
  const auto [c, sn] = cos_sin_snapped(p.theta0);
  const double kick = p.hbar * 2.0 * s.q * out.slow.at_mid.w;
  out.state.p = c * s.p - sn * s.q - c * kick;
  out.state.q = c * s.q + sn * s.p - sn * kick;
  out.state.Q = out.slow.Qbar;
  out.state.P = out.slow.Pbar;
  return out;
}

/// One step of the fast-slow nearly-periodic map.
template <SlowPotential Pot>
FsState fs_step(const FsState& s, const Pot& pot, const FsParams& p) {
  return fs_step_report(s, pot, p).state;
}

/// Residual of the fast generating relations
///   pbar = cot(theta0) qbar - q / sin(theta0),
///   p    = -cot(theta0) q + qbar / sin(theta0) + 2 hbar q W(m),
/// multiplied through by sin(theta0) so the resonant case stays finite.
inline double fs_fast_residual(const FsState& s, const FsState& next, double w_mid, const FsParams& p) {
  const auto [c, sn] = cos_sin_snapped(p.theta0);
  const double r1 = sn * next.p - (c * next.q - s.q);
  const double r2 = sn * s.p - (-c * s.q + next.q + sn * 2.0 * p.hbar * s.q * w_mid);
  return std::max(std::abs(r1), std::abs(r2));
}

struct StiffParams {
  double h = 0.1;
  double eps = 0.001;
  double fp_tol = 1e-12;
  std::size_t fp_max_iter = 200;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be > 0");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
    if (!(fp_tol > 0.0)) throw DomainError("fp_tol must be > 0");
    if (fp_max_iter == 0) throw DomainError("fp_max_iter must be >= 1");
  }
};

struct StiffStepResult {
  FsState state;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Residual of the four implicit-midpoint equations.
inline double stiff_midpoint_residual(const FsState& s, const FsState& next, const PotentialValues& at_mid,
                                      const StiffParams& sp) {
  const double h = sp.h;
  const double he = sp.h * sp.eps;
  const double qs = next.q + s.q;
  const double r1 = qs + 2.0 * (next.p - s.p) / h + sp.eps * 4.0 * 0.5 * qs * at_mid.w;
  const double r2 = (next.p + s.p) - 2.0 * (next.q - s.q) / h;
  const Vec4 r3 = (next.P - s.P) + he * (at_mid.grad_v + (0.25 * qs * qs) * at_mid.grad_w);
  const Vec4 r4 = (next.Q - s.Q) - (0.5 * he) * (s.P + next.P);
  return std::max({std::abs(r1), std::abs(r2), norm_inf(r3), norm_inf(r4)});
}

/// Implicit midpoint rule on the stiff flow at physical step h. The fast
/// pair is linear once W at the midpoint is fixed, so each sweep solves it
/// exactly and iterates only on the slow variables; a plain sweep over all
/// variables cannot contract once h exceeds 2.
template <SlowPotential Pot>
StiffStepResult stiff_midpoint_step(const FsState& s, const Pot& pot, const StiffParams& sp) {
  const double h = sp.h;
  const double he = sp.h * sp.eps;
  StiffStepResult out;
  FsState& n = out.state;

  const PotentialValues at_start = pot.evaluate(s.Q);
  n.P = s.P - he * (at_start.grad_v + (s.q * s.q) * at_start.grad_w);
  n.Q = s.Q + he * s.P;

  double residual = INFINITY;
  for (std::size_t it = 1; it <= sp.fp_max_iter; ++it) {
    const PotentialValues at_mid = pot.evaluate(0.5 * (s.Q + n.Q));
    // (pbar - p) = -a (qbar + q), (qbar - q) = b (pbar + p).
    const double a = 0.5 * h * (1.0 + 2.0 * sp.eps * at_mid.w);
    const double b = 0.5 * h;
    n.p = (s.p * (1.0 - a * b) - 2.0 * a * s.q) / (1.0 + a * b);
    n.q = s.q + b * (s.p + n.p);

    residual = stiff_midpoint_residual(s, n, at_mid, sp);
    out.iterations = it;
    if (residual <= sp.fp_tol) {
      out.residual = residual;
      return out;
    }
    if (!std::isfinite(residual)) throw NonConvergence(it, residual);
    const double qs = n.q + s.q;
    n.P = s.P - he * (at_mid.grad_v + (0.25 * qs * qs) * at_mid.grad_w);
    n.Q = s.Q + (0.5 * he) * (s.P + n.P);
  }
  throw NonConvergence(sp.fp_max_iter, residual);
}

}  // namespace geoint

#endif  // GEOINT_FASTSLOW_HPP
