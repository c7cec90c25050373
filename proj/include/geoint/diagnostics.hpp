// SPDX-License-Identifier: Apache-2.0
//
// Conserved quantities, symplecticity defects and the empirical breakdown
// time of an adiabatic invariant.

#ifndef GEOINT_DIAGNOSTICS_HPP
#define GEOINT_DIAGNOSTICS_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "geoint/core.hpp"
#include "geoint/errors.hpp"
#include "geoint/fastslow.hpp"
#include "geoint/fields.hpp"
#include "geoint/slm.hpp"

namespace geoint {

/// g_q(v - X_H, v - X_H) = B(q) |v - X_H(q)|^2, the plotted form of the
/// leading adiabatic invariant (no factor 1/2).
template <MagneticField F>
double mu_gc(const F& field, const DriftParams& dp, const GCState& s) {
  const double b = b_value(field, s.q);
  const Vec2 d = s.v - drift_velocity(field, dp, s.q);
  return b * dot(d, d);
}

/// (q^2 + p^2) / 2.
inline double mu_fast(double q, double p) { return 0.5 * (q * q + p * p); }

/// Coordinate matrix of Omega* = -B dx^dy - hbar^2 d(B v.dq) in the basis
/// (x, y, vx, vy); Omega*(a, b) = a^T M b.
template <MagneticField F>
Mat4 omega_star(const F& field, const GCState& s, double hbar) {
  const double b = b_value(field, s.q);
  const Vec2 g = field.gradient(s.q);
  const double e = hbar * hbar;
  Mat4 m;
  m(0, 1) = -b - e * (s.v.y * g.x - s.v.x * g.y);
  m(0, 2) = e * b;
  m(1, 3) = e * b;
  m(1, 0) = -m(0, 1);
  m(2, 0) = -m(0, 2);
  m(3, 1) = -m(1, 3);
  return m;
}

/// dq^dp + sum dQ^i ^ dP_i in the basis (q, p, Q1..Q4, P1..P4).
inline Mat<10> canonical_form_fs() {
  Mat<10> m;
  m(0, 1) = 1.0;
  m(1, 0) = -1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    m(2 + i, 6 + i) = 1.0;
    m(6 + i, 2 + i) = -1.0;
  }
  return m;
}

inline std::array<double, 4> to_array(const GCState& s) { return {s.q.x, s.q.y, s.v.x, s.v.y}; }
inline GCState gc_from_array(const std::array<double, 4>& z) { return {{z[0], z[1]}, {z[2], z[3]}}; }

inline std::array<double, 10> to_array(const FsState& s) {
  return {s.q, s.p, s.Q[0], s.Q[1], s.Q[2], s.Q[3], s.P[0], s.P[1], s.P[2], s.P[3]};
}
inline FsState fs_from_array(const std::array<double, 10>& z) {
  return {z[0], z[1], {z[2], z[3], z[4], z[5]}, {z[6], z[7], z[8], z[9]}};
}

/// Central-difference Jacobian with one Richardson refinement,
/// (4 D(eps/2) - D(eps)) / 3. Column j holds d step / d z_j.
template <std::size_t N, class Step>
Mat<N> jacobian_fd(Step&& step, const std::array<double, N>& z, double fd_eps) {
  auto central = [&](double e) {
    Mat<N> d;
    for (std::size_t j = 0; j < N; ++j) {
      auto zp = z;
      auto zm = z;
      zp[j] += e;
      zm[j] -= e;
      const std::array<double, N> fp = step(zp);
      const std::array<double, N> fm = step(zm);
      for (std::size_t i = 0; i < N; ++i) d(i, j) = (fp[i] - fm[i]) / (2.0 * e);
    }
    return d;
  };
  return (4.0 * central(0.5 * fd_eps) - central(fd_eps)) * (1.0 / 3.0);
}

/// || D^T M(F(z)) D - M(z) ||_inf for the map `step` and the form `form`.
template <std::size_t N, class Step, class Form>
double symplecticity_defect(Step&& step, Form&& form, const std::array<double, N>& z, double fd_eps) {
  const Mat<N> d = jacobian_fd<N>(step, z, fd_eps);
  const Mat<N> pulled = d.transposed() * form(step(z)) * d;
  return norm_inf(pulled - form(z));
}

/// Defect of a guiding-center stepper against Omega*.
template <MagneticField F, class Stepper>
double symplecticity_defect(Stepper&& stepper, const F& field, const GCState& s, double hbar, double fd_eps) {
  auto step = [&](const std::array<double, 4>& z) { return to_array(stepper(gc_from_array(z))); };
  auto form = [&](const std::array<double, 4>& z) { return omega_star(field, gc_from_array(z), hbar); };
  return symplecticity_defect<4>(step, form, to_array(s), fd_eps);
}

/// Per-step invariant values and the physical time per step.
struct MuSeries {
  std::vector<double> values;
  double step_time = 1.0;
};

struct BreakdownConfig {
  std::size_t window = 200;
  std::size_t amplitude_window = 2000;

  void validate() const {
    if (window < 2) throw DomainError("breakdown window must be >= 2");
    if (amplitude_window < window) throw DomainError("amplitude_window must be >= window");
  }
};

namespace detail {

/// Shifted prefix sums; shifting by the first value keeps the estimator
/// invariant under adding a constant to the series.
class MovingMean {
 public:
  MovingMean(const std::vector<double>& values, std::size_t window) : window_(window), n_(values.size()) {
    prefix_.resize(n_ + 1);
    const double base = values.empty() ? 0.0 : values.front();
    long double acc = 0.0L;
    prefix_[0] = 0.0L;
    for (std::size_t i = 0; i < n_; ++i) {
      acc += static_cast<long double>(values[i] - base);
      prefix_[i + 1] = acc;
    }
  }

  /// Centered window, shifted to stay inside the series at the ends.
  double at(std::size_t i) const {
    const std::size_t half = window_ / 2;
    std::size_t start = i > half ? i - half : 0;
    start = std::min(start, n_ - window_);
    return static_cast<double>((prefix_[start + window_] - prefix_[start]) / static_cast<long double>(window_));
  }

  /// Last index whose window is not clamped at the right end.
  std::size_t last_interior() const { return n_ - (window_ - window_ / 2); }

 private:
  std::size_t window_;
  std::size_t n_;
  std::vector<long double> prefix_;
};

/// First index n with |mean(n) - mean(0)| > amplitude. With `complete`
/// false only indices whose window lies fully inside the series are
/// considered, so a prefix of a longer series yields the same answer.
inline std::optional<std::size_t> first_breakdown_index(const std::vector<double>& values,
                                                        const BreakdownConfig& cfg, bool complete) {
  cfg.validate();
  const std::size_t n = values.size();
  if (n <= cfg.amplitude_window + cfg.window / 2 && !complete)
    throw SeriesTooShort("series too short for the breakdown estimator");
  if (n <= cfg.amplitude_window) throw SeriesTooShort("series length must exceed amplitude_window");

  const double base = values.front();
  const MovingMean mean(values, cfg.window);
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t i = 0; i < cfg.amplitude_window; ++i) {
    const double r = (values[i] - base) - mean.at(i);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double amplitude = 0.5 * (hi - lo);
  const double mean0 = mean.at(0);
  const std::size_t end = complete ? n : mean.last_interior() + 1;
  for (std::size_t i = 0; i < end; ++i)
    if (std::abs(mean.at(i) - mean0) > amplitude) return i;
  return std::nullopt;
}

}  // namespace detail

/// Empirical breakdown time: the first n * step_time at which the moving
/// mean of the invariant has left its starting value by more than the
/// initial oscillation amplitude. The amplitude is half the peak-to-peak
/// range of (mu - moving mean) over the first amplitude_window samples.
inline std::optional<double> breakdown_time(const MuSeries& series, const BreakdownConfig& cfg) {
  const auto idx = detail::first_breakdown_index(series.values, cfg, true);
  if (!idx) return std::nullopt;
  return static_cast<double>(*idx) * series.step_time;
}

}  // namespace geoint

#endif  // GEOINT_DIAGNOSTICS_HPP
