// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "geoint/diagnostics.hpp"
#include "geoint/experiments.hpp"
#include "geoint/fastslow.hpp"

namespace geoint {
namespace {

FsParams fs_params(double hbar, double theta0) {
  FsParams p;
  p.hbar = hbar;
  p.theta0 = theta0;
  return p;
}

FsState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), {1.0 + 0.3 * u(rng), 0.3 * u(rng), -1.2 + 0.3 * u(rng), 0.3 * u(rng)},
          {0.3 * u(rng), 1.0 + 0.3 * u(rng), 0.3 * u(rng), -0.9 + 0.3 * u(rng)}};
}

TEST(Gravity, PointValues) {
  EXPECT_DOUBLE_EQ(gravity_potentials({1.0, 0.0, 0.0, 2.0}).v, -1.5);
  const PotentialValues pv = gravity_potentials({1.0, 0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(pv.w, -1.0);
  EXPECT_EQ(pv.grad_w, (Vec4{-1.0, 0.0, 1.0, 0.0}));
}

TEST(Gravity, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int tested = 0;
  while (tested < 100) {
    const Vec4 Q{u(rng), u(rng), u(rng), u(rng)};
    if (std::hypot(Q[0], Q[1]) < 0.2 || std::hypot(Q[2], Q[3]) < 0.2 || std::hypot(Q[0] - Q[2], Q[1] - Q[3]) < 0.2)
      continue;
    ++tested;
    const PotentialValues pv = gravity_potentials(Q);
    for (std::size_t j = 0; j < 4; ++j) {
      Vec4 qp = Q, qm = Q;
      qp[j] += 1e-6;
      qm[j] -= 1e-6;
      const PotentialValues a = gravity_potentials(qp), b = gravity_potentials(qm);
      EXPECT_NEAR((a.v - b.v) / 2e-6, pv.grad_v[j], 1e-5);
      EXPECT_NEAR((a.w - b.w) / 2e-6, pv.grad_w[j], 1e-5);
    }
  }
}

TEST(Gravity, SingularConfigurationsRaise) {
  EXPECT_THROW(gravity_potentials({0.0, 0.0, 1.0, 0.0}), SingularConfiguration);
  EXPECT_THROW(gravity_potentials({1.0, 0.0, 0.0, 0.0}), SingularConfiguration);
  EXPECT_THROW(gravity_potentials({1.0, 1.0, 1.0, 1.0}), SingularConfiguration);
}

TEST(SlowSolve, ForceFreeIsOneIteration) {
  const FsState s{0.5, 0.1, {1.0, 2.0, 3.0, 4.0}, {0.1, -0.2, 0.3, 0.5}};
  const FsSlowResult r = fs_slow_solve(s, ZeroPotential{}, fs_params(0.1, 2.0));
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.Qbar, s.Q + 0.1 * s.P);
  EXPECT_EQ(r.Pbar, s.P);
}

TEST(SlowSolve, HarmonicClosedForm) {
  // Qbar (1 + h^2/4) = Q (1 - h^2/4) + h P per component.
  const FsState s{0.0, 0.0, {1.0, 0.0, 0.0, 0.0}, {}};
  const FsSlowResult r = fs_slow_solve(s, HarmonicPotential{}, fs_params(0.1, 2.0));
  EXPECT_NEAR(r.Qbar[0], 0.9975 / 1.0025, 1e-12);
  EXPECT_NEAR(r.Pbar[0], -0.1 / 1.0025, 1e-12);
  EXPECT_NEAR(r.Qbar[0], 0.99501246883, 1e-11);
  EXPECT_NEAR(r.Pbar[0], -0.09975062344, 1e-11);
}

TEST(SlowSolve, EnergyErrorPerStepIsThirdOrder) {
  // q = 0 removes the coupling; the slow step is the midpoint rule for V.
  const FsState s{0.0, 0.0, {1.0, 0.2, -1.5, 0.1}, {0.1, 0.9, -0.2, -0.7}};
  auto energy = [](const Vec4& Q, const Vec4& P) { return 0.5 * dot(P, P) + gravity_potentials(Q).v; };
  std::vector<double> hs, errs;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    const FsSlowResult r = fs_slow_solve(s, TwoBodyGravity{}, fs_params(h, 2.0));
    hs.push_back(h);
    errs.push_back(std::abs(energy(r.Qbar, r.Pbar) - energy(s.Q, s.P)));
  }
  EXPECT_GE(loglog_slope(hs, errs), 2.8);
}

TEST(SlowSolve, ResidualAuditAndNonConvergence) {
  const FsState s = presets::gravity_initial();
  const FsParams p = fs_params(0.1, 2.0);
  const FsSlowResult r = fs_slow_solve(s, TwoBodyGravity{}, p);
  EXPECT_LE(fs_slow_residual(s, r.Qbar, r.Pbar, TwoBodyGravity{}.evaluate(0.5 * (s.Q + r.Qbar)), p.hbar), p.fp_tol);
  FsParams big = fs_params(10.0, 2.0);
  EXPECT_THROW(fs_slow_solve(s, TwoBodyGravity{}, big), Error);
}

TEST(FsStep, FormalLimitIsRotation) {
  FsParams p = fs_params(0.0, std::numbers::pi / 2);
  const FsState s{1.0, 0.0, {1.0, 0.0, -1.0, 0.0}, {0.0, 1.0, 0.0, -1.0}};
  const FsState n = fs_step(s, TwoBodyGravity{}, p);
  EXPECT_EQ(n.q, 0.0);
  EXPECT_EQ(n.p, -1.0);
  EXPECT_EQ(n.Q, s.Q);
  EXPECT_EQ(n.P, s.P);
}

TEST(FsStep, ResonantAngleFlipsQExactly) {
  const FsParams p = fs_params(0.1, std::numbers::pi);
  FsState s = presets::gravity_initial();
  for (int n = 0; n < 100; ++n) {
    const FsState next = fs_step(s, TwoBodyGravity{}, p);
    ASSERT_EQ(next.q, -s.q) << n;
    ASSERT_GT(std::abs(next.p), std::abs(s.p)) << n;
    s = next;
  }
}

TEST(FsStep, ForceFreeRotationPreservesInvariant) {
  const FsParams p = fs_params(0.1, 2.0);
  FsState s{0.6, -0.8, {1.0, 0.0, -1.0, 0.0}, {0.0, 1.0, 0.0, -1.0}};
  const FsState n = fs_step(s, ZeroPotential{}, p);
  EXPECT_NEAR(n.q, std::cos(2.0) * 0.6 + std::sin(2.0) * -0.8, 1e-15);
  EXPECT_NEAR(n.p, -std::sin(2.0) * 0.6 + std::cos(2.0) * -0.8, 1e-15);
  EXPECT_NEAR(mu_fast(n.q, n.p), mu_fast(s.q, s.p), 1e-13);
}

TEST(FsStep, FastGeneratingRelationsHold) {
  std::mt19937_64 rng(23);
  const FsParams p = fs_params(0.1, 2.0);
  for (int i = 0; i < 20; ++i) {
    const FsState s = random_state(rng);
    const FsStepResult r = fs_step_report(s, TwoBodyGravity{}, p);
    EXPECT_LT(fs_fast_residual(s, r.state, r.slow.at_mid.w, p), 1e-14);
  }
}

TEST(FsStep, CanonicallySymplectic) {
  std::mt19937_64 rng(29);
  for (double theta0 : {2.0, std::numbers::pi}) {
    const FsParams p = fs_params(0.1, theta0);
    for (int i = 0; i < 10; ++i) {
      const FsState s = random_state(rng);
      auto step = [&](const std::array<double, 10>& z) { return to_array(fs_step(fs_from_array(z), TwoBodyGravity{}, p)); };
      auto form = [](const std::array<double, 10>&) { return canonical_form_fs(); };
      EXPECT_LT(symplecticity_defect<10>(step, form, to_array(s), 1e-5), 1e-5);
    }
  }
}

TEST(Stiff, HarmonicOscillatorCayleyRotation) {
  StiffParams sp;
  sp.h = 0.1;
  const FsState n = stiff_midpoint_step({1.0, 0.0, {1.0, 0.0, -1.0, 0.0}, {}}, ZeroPotential{}, sp).state;
  const double d = 1.0 + 0.0025;
  EXPECT_NEAR(n.q, (1.0 - 0.0025) / d, 1e-14);
  EXPECT_NEAR(n.p, -0.1 / d, 1e-14);
  EXPECT_NEAR(std::atan2(-n.p, n.q), 2.0 * std::atan(0.05), 1e-14);
}

TEST(Stiff, ForceFreeSlowVariablesDrift) {
  StiffParams sp;
  sp.h = 4.0;
  const FsState s{0.3, 0.2, {1.0, 2.0, 3.0, 4.0}, {0.5, -0.5, 1.0, 0.0}};
  const FsState n = stiff_midpoint_step(s, ZeroPotential{}, sp).state;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(n.Q[i], s.Q[i] + sp.h * sp.eps * s.P[i], 1e-15);
    EXPECT_EQ(n.P[i], s.P[i]);
  }
}

TEST(Stiff, LargeStepCollapsesCouplingChannel) {
  StiffParams sp;
  sp.h = 100.0;
  const FsState s = presets::gravity_initial();
  const StiffStepResult r = stiff_midpoint_step(s, TwoBodyGravity{}, sp);
  EXPECT_LT(std::abs(r.state.q + s.q), std::abs(s.q) * 4.0 / sp.h * 1.05);
  EXPECT_LE(r.residual, sp.fp_tol);
}

TEST(Stiff, ResidualAuditOverRun) {
  for (double h : {0.1, 4.0, 100.0}) {
    StiffParams sp;
    sp.h = h;
    FsState s = presets::gravity_initial();
    for (int n = 0; n < 200; ++n) {
      const StiffStepResult r = stiff_midpoint_step(s, TwoBodyGravity{}, sp);
      const PotentialValues mid = TwoBodyGravity{}.evaluate(0.5 * (s.Q + r.state.Q));
      ASSERT_LE(stiff_midpoint_residual(s, r.state, mid, sp), sp.fp_tol) << "h=" << h << " step " << n;
      s = r.state;
    }
  }
}

TEST(Stiff, SymplecticAsAMidpointRule) {
  std::mt19937_64 rng(31);
  StiffParams sp;
  sp.h = 4.0;
  for (int i = 0; i < 5; ++i) {
    const FsState s = random_state(rng);
    auto step = [&](const std::array<double, 10>& z) {
      return to_array(stiff_midpoint_step(fs_from_array(z), TwoBodyGravity{}, sp).state);
    };
    auto form = [](const std::array<double, 10>&) { return canonical_form_fs(); };
    EXPECT_LT(symplecticity_defect<10>(step, form, to_array(s), 1e-5), 1e-5);
  }
}

TEST(FsParams, Validation) {
  FsParams p;
  EXPECT_NO_THROW(p.validate());
  p.hbar = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = FsParams{};
  p.eps = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_DOUBLE_EQ(FsParams{}.step_size(), 100.0);
}

}  // namespace
}  // namespace geoint
