// SPDX-License-Identifier: Apache-2.0
//
// Quick invariant suite behind the `check` subcommand. Every check runs in
// well under a second and is deterministic (fixed seeds).

#ifndef GEOINT_CHECKS_HPP
#define GEOINT_CHECKS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "geoint/diagnostics.hpp"
#include "geoint/experiments.hpp"
#include "geoint/fastslow.hpp"
#include "geoint/fields.hpp"
#include "geoint/slm.hpp"

namespace geoint {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured quantity
  double bound = 0.0;  // threshold it is compared against
  std::string note;
};

namespace detail {

inline GCState random_gc_state(std::mt19937_64& rng, const DriftParams& dp, const auto& field) {
  std::uniform_real_distribution<double> pos(-1.5, 1.5);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  const Vec2 q{pos(rng), pos(rng)};
  return {q, drift_velocity(field, dp, q) + Vec2{off(rng), off(rng)}};
}

inline FsState random_fs_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FsState s;
  s.q = u(rng);
  s.p = u(rng);
  s.Q = {1.0 + 0.2 * u(rng), 0.2 * u(rng), -1.0 + 0.2 * u(rng), 0.2 * u(rng)};
  s.P = {0.3 * u(rng), 1.0 + 0.3 * u(rng), 0.3 * u(rng), -1.0 + 0.3 * u(rng)};
  return s;
}

inline CheckResult upper_bound_check(std::string name, double value, double bound) {
  return {std::move(name), value < bound, value, bound, {}};
}

}  // namespace detail

inline CheckResult check_slm_symplectic() {
  std::mt19937_64 rng(7);
  SlmParams p;
  double worst = 0.0;
  auto run = [&](const auto& field) {
    for (int i = 0; i < 5; ++i) {
      const GCState s = detail::random_gc_state(rng, p.drift, field);
      auto stepper = [&](const GCState& z) { return slm_step(field, z, p); };
      worst = std::max(worst, symplecticity_defect(stepper, field, s, p.hbar, 1e-5));
    }
  };
  run(QuadraticField{1.0, 0.1});
  run(FigureEightField{});
  return detail::upper_bound_check("slm preserves the magnetic symplectic form", worst, 1e-5);
}

inline CheckResult check_constant_field_rotation() {
  const QuadraticField field{1.0, 0.0};
  double worst = 0.0;
  for (double h : {1e-3, 0.1, 1.0}) {
    SlmParams p;
    p.hbar = h;
    const GCState s{{0.3, -0.2}, {0.7, 0.4}};
    const GCState n = slm_step(field, s, p);
    const Vec2 expect = rotation_matrix(p.theta0) * s.v;
    worst = std::max({worst, norm_inf(n.v - expect), std::abs(norm(n.v) - norm(s.v))});
  }
  return detail::upper_bound_check("constant field rotates v by theta0", worst, 1e-12);
}

inline CheckResult check_limit_map() {
  const FigureEightField field;
  SlmParams p;
  p.hbar = 1e-4;
  const GCState s{{1.2, 0.4}, {0.5, -0.3}};
  const Vec2 xh = drift_velocity(field, p.drift, s.q);
  const Vec2 expect = xh + rotation_matrix(p.theta0) * (s.v - xh);
  const GCState n = slm_step(field, s, p);
  return detail::upper_bound_check("slm tends to the rotation about X_H as hbar -> 0", norm(n.v - expect), 1e-3);
}

inline CheckResult check_fs_canonical() {
  std::mt19937_64 rng(11);
  FsParams p;
  const TwoBodyGravity pot;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const FsState s = detail::random_fs_state(rng);
    auto step = [&](const std::array<double, 10>& z) { return to_array(fs_step(fs_from_array(z), pot, p)); };
    auto form = [](const std::array<double, 10>&) { return canonical_form_fs(); };
    worst = std::max(worst, symplecticity_defect<10>(step, form, to_array(s), 1e-5));
  }
  return detail::upper_bound_check("fast-slow map is canonically symplectic", worst, 1e-5);
}

inline CheckResult check_resonant_flip() {
  FsParams p;
  p.theta0 = std::numbers::pi;
  FsState s = presets::gravity_initial();
  bool flips = true;
  bool grows = true;
  for (int n = 0; n < 100; ++n) {
    const FsState next = fs_step(s, TwoBodyGravity{}, p);
    flips = flips && next.q == -s.q;
    grows = grows && std::abs(next.p) > std::abs(s.p);
    s = next;
  }
  CheckResult r{"resonant map flips q exactly and pumps |p|", flips && grows, std::abs(s.p), 0.0, {}};
  if (!flips) r.note = "q did not flip exactly";
  if (!grows) r.note += r.note.empty() ? "|p| not monotone" : "; |p| not monotone";
  return r;
}

inline CheckResult check_solver_audit() {
  const FigureEightField field;
  SlmParams p;
  GCState s{{2.0, 0.0}, drift_velocity(field, p.drift, {2.0, 0.0})};
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const GCState next = slm_step(field, s, p);
    worst = std::max(worst, slm_residuals(field, s, next, p).max());
    s = next;
  }
  FsParams fp;
  FsState f = presets::gravity_initial();
  for (int n = 0; n < 200; ++n) {
    const FsStepResult r = fs_step_report(f, TwoBodyGravity{}, fp);
    worst = std::max(worst, fs_slow_residual(f, r.state.Q, r.state.P, r.slow.at_mid, fp.hbar));
    f = r.state;
  }
  bool rejected = false;
  SlmParams bad = p;
  bad.hbar = 10.0;
  try {
    (void)slm_step(field, GCState{{2.0, 0.0}, {0.0, 2.0}}, bad);
  } catch (const NonConvergence&) {
    rejected = true;
  }
  CheckResult r{"implicit solves re-substitute within 1e-12", worst <= 1e-12 && rejected, worst, 1e-12, {}};
  if (!rejected) r.note = "hbar = 10 did not raise NonConvergence";
  return r;
}

inline std::vector<CheckResult> run_checks() {
  return {check_slm_symplectic(), check_constant_field_rotation(), check_limit_map(),
          check_fs_canonical(),   check_resonant_flip(),           check_solver_audit()};
}

}  // namespace geoint

#endif  // GEOINT_CHECKS_HPP
