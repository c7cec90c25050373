// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <complex>
#include <numbers>
#include <random>

#include "geoint/diagnostics.hpp"
#include "geoint/experiments.hpp"
#include "geoint/slm.hpp"

namespace geoint {
namespace {

SlmParams params(double hbar, double theta0 = 2.0, DriftParams dp = {1.0, 1.0}) {
  SlmParams p;
  p.hbar = hbar;
  p.theta0 = theta0;
  p.drift = dp;
  return p;
}

TEST(SlmParams, Validation) {
  EXPECT_THROW(params(0.0).validate(), DomainError);
  EXPECT_THROW(params(-1.0).validate(), DomainError);
  EXPECT_THROW(params(0.1, 0.0).validate(), DomainError);
  EXPECT_THROW(params(0.1, std::numbers::pi).validate(), DomainError);
  EXPECT_NO_THROW(params(0.1, 2.0).validate());
  EXPECT_NEAR(params(0.1, std::numbers::pi / 2).cot_half(), 1.0, 1e-15);
}

TEST(Sigma, PointValues) {
  const QuadraticField unit{1.0, 0.0};
  EXPECT_NEAR(sigma_value(unit, {0.0, 0.0}, {1.0, 0.0}, params(0.0, std::numbers::pi / 2)), -0.25, 1e-15);
  EXPECT_EQ(sigma_value(unit, {0.3, 0.1}, {0.0, 0.0}, params(0.0)), 0.0);
}

TEST(Sigma, QuadraticTermVanishesOnDriftChord) {
  const FigureEightField f;
  const SlmParams p = params(0.1, 2.0, {0.8, 1.0});
  const Vec2 eta{1.2, 0.3};
  const Vec2 xh = drift_velocity(f, p.drift, eta);
  const double b = b_value(f, eta);
  const double expect = -p.hbar * p.drift.mu_eff() * b + std::pow(p.hbar, 3) * b * dot(xh, xh);
  EXPECT_NEAR(sigma_value(f, eta, p.hbar * xh, p), expect, 1e-15);
}

TEST(Sigma, DerivativesConstantField) {
  const QuadraticField c{1.5, 0.0};
  const SlmParams p = params(0.1, 1.1);
  const Vec2 xi{0.2, -0.7};
  const SigmaDerivatives d = sigma_derivatives(c, {0.4, 0.4}, xi, p);
  EXPECT_EQ(d.d_eta, (Vec2{0.0, 0.0}));
  const Vec2 expect = (-0.5 * p.cot_half() * 1.5) * xi;
  EXPECT_NEAR(d.d_xi.x, expect.x, 1e-15);
  EXPECT_NEAR(d.d_xi.y, expect.y, 1e-15);
}

TEST(Sigma, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Vec2 eta{u(rng), u(rng)};
    const Vec2 xi{0.2 * u(rng), 0.2 * u(rng)};
    const SlmParams p = params(0.15, 1.3, {1.2, 1.0});
    const FigureEightField f;
    const SigmaDerivatives d = sigma_derivatives(f, eta, xi, p);
    auto s = [&](Vec2 e, Vec2 x) { return sigma_value(f, e, x, p); };
    const Vec2 ex{h, 0.0}, ey{0.0, h};
    const Vec2 fd_eta{(s(eta + ex, xi) - s(eta - ex, xi)) / (2 * h), (s(eta + ey, xi) - s(eta - ey, xi)) / (2 * h)};
    const Vec2 fd_xi{(s(eta, xi + ex) - s(eta, xi - ex)) / (2 * h), (s(eta, xi + ey) - s(eta, xi - ey)) / (2 * h)};
    EXPECT_LT(norm_inf(fd_eta - d.d_eta), 1e-5);
    EXPECT_LT(norm_inf(fd_xi - d.d_xi), 1e-5);
  }
}

TEST(ChordIntegrals, PointValues) {
  const ChordIntegrals c = chord_integrals(QuadraticField{1.0, 0.0}, {3.0, 1.0}, {0.5, -2.0});
  EXPECT_NEAR(c.i0, 0.5, 1e-15);
  EXPECT_NEAR(c.i1, 0.5, 1e-15);
  const ChordIntegrals d = chord_integrals(FigureEightField{}, {2.0, 0.0}, {0.0, 0.0});
  EXPECT_NEAR(d.i0, 1.0, 1e-15);
  EXPECT_NEAR(d.i1, 1.0, 1e-15);
}

TEST(ChordIntegrals, MatchAnalyticAntiderivative) {
  // B(x, 0) = 2 - x^2 + x^4 / 4 along x = 2 + 0.1 lambda.
  auto antiderivative = [](double x) { return 2.0 * x - x * x * x / 3.0 + std::pow(x, 5) / 20.0; };
  const double exact = (antiderivative(2.1) - antiderivative(2.0)) / 0.1;
  const ChordIntegrals c = chord_integrals(FigureEightField{}, {2.0, 0.0}, {0.1, 0.0});
  EXPECT_LT(std::abs((c.i0 + c.i1) - exact) / exact, 1e-13);
}

TEST(SolveXi, ConstantFieldClosedForm) {
  // With grad B = 0 the chord solves (k/2 - R/2) xi = -hbar^2 v. In complex
  // form R is multiplication by i, so xi = 2 hbar^2 v / (i - k).
  const double h = 0.1;
  const SlmParams p = params(h, std::numbers::pi / 2);
  const SlmSolveReport r = solve_xi(QuadraticField{1.0, 0.0}, {{0.0, 0.0}, {1.0, 0.0}}, p);
  const std::complex<double> z = 2.0 * h * h * std::complex<double>(1.0, 0.0) / std::complex<double>(-1.0, 1.0);
  EXPECT_NEAR(r.xi.x, z.real(), 1e-15);
  EXPECT_NEAR(r.xi.y, z.imag(), 1e-15);
  EXPECT_NEAR(r.xi.x, -0.01, 1e-15);
  EXPECT_NEAR(r.xi.y, -0.01, 1e-15);
}

TEST(SolveXi, RestStateConvergesInOneIteration) {
  const SlmSolveReport r = solve_xi(QuadraticField{1.0, 0.0}, {{1.0, 2.0}, {0.0, 0.0}}, params(0.1));
  EXPECT_EQ(r.xi, (Vec2{0.0, 0.0}));
  EXPECT_EQ(r.iterations, 1u);
}

TEST(SolveXi, EtaIsMidpointAndResidualWithinTolerance) {
  const FigureEightField f;
  const SlmParams p = params(0.1);
  const GCState s{{1.1, -0.4}, {0.3, 0.9}};
  const SlmSolveReport r = solve_xi(f, s, p);
  EXPECT_EQ(r.eta, s.q + 0.5 * r.xi);
  EXPECT_LE(r.residual_norm, p.fp_tol);
}

TEST(SolveXi, DriftChordForSmallHbar) {
  const FigureEightField f;
  const Vec2 q{1.3, 0.2};
  for (double h : {1e-2, 1e-3}) {
    const SlmParams p = params(h);
    const Vec2 xh = drift_velocity(f, p.drift, q);
    const SlmSolveReport r = solve_xi(f, {q, xh}, p);
    EXPECT_LT(norm(r.xi / h - xh), 10 * h);
  }
}

TEST(SolveXi, ResidualsContractOverFinalIterations) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double h : {0.1, 0.05}) {
    for (int i = 0; i < 20; ++i) {
      const Vec2 q{1.5 * u(rng), 1.5 * u(rng)};
      const SlmParams p = params(h);
      for (auto field : {AnyField{FigureEightField{}}, AnyField{QuadraticField{1.0, 0.2}}}) {
        const SlmSolveReport r = std::visit(
            [&](const auto& f) { return solve_xi(f, {q, drift_velocity(f, p.drift, q) + Vec2{u(rng), u(rng)}}, p); },
            field);
        for (std::size_t k = 1; k < r.n_last; ++k) EXPECT_LT(r.last_residuals[k], r.last_residuals[k - 1]);
      }
    }
  }
}

TEST(SolveXi, NonContractingStepRaises) {
  const FigureEightField f;
  const SlmParams p = params(10.0);
  try {
    (void)solve_xi(f, {{2.0, 0.0}, drift_velocity(f, p.drift, {2.0, 0.0})}, p);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.residual(), p.fp_tol);
    EXPECT_GE(e.iterations(), 1u);
  }
}

TEST(SlmStep, ConstantFieldRotatesVelocity) {
  const QuadraticField c{1.0, 0.0};
  for (double h : {1e-3, 0.1, 0.5, 1.0}) {
    const GCState n = slm_step(c, {{0.0, 0.0}, {1.0, 0.0}}, params(h, 2.0));
    EXPECT_NEAR(n.v.x, std::cos(2.0), 1e-12) << h;
    EXPECT_NEAR(n.v.y, std::sin(2.0), 1e-12) << h;
    EXPECT_NEAR(norm(n.v), 1.0, 1e-12);
  }
}

TEST(SlmStep, ReSubstitutionResidualsWithinTolerance) {
  const FigureEightField f;
  const SlmParams p = params(0.1);
  GCState s{{2.0, 0.0}, drift_velocity(f, p.drift, {2.0, 0.0}) + Vec2{0.3, 0.0}};
  for (int n = 0; n < 2000; ++n) {
    const GCState next = slm_step(f, s, p);
    ASSERT_LE(slm_residuals(f, s, next, p).max(), p.fp_tol) << "step " << n;
    s = next;
  }
}

TEST(SlmStep, LimitMapIsRotationAboutDrift) {
  const FigureEightField f;
  const GCState s{{1.2, 0.4}, {0.5, -0.3}};
  double previous = INFINITY;
  for (double h : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const SlmParams p = params(h);
    const Vec2 xh = drift_velocity(f, p.drift, s.q);
    const Vec2 limit = xh + rotation_matrix(p.theta0) * (s.v - xh);
    const double err = norm(slm_step(f, s, p).v - limit);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(SlmStep, LocalTruncationOrder) {
  const QuadraticField f{1.0, 0.001};
  const Vec2 q{1.0, 1.0};
  std::vector<double> hs, errs;
  for (double h : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
    const SlmParams p = params(h);
    const DriftSample d = sample_drift(f, p.drift, q);
    const Vec2 taylor = q + h * d.drift + (0.5 * h * h) * (d.drift_jac * d.drift);
    hs.push_back(h);
    errs.push_back(norm(slm_step(f, {q, d.drift}, p).q - taylor));
  }
  EXPECT_GE(loglog_slope(hs, errs), 2.5);
}

TEST(SlmStep, SymplecticOnBothFields) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double h : {0.2, 0.1, 0.05}) {
    const SlmParams p = params(h);
    for (int i = 0; i < 4; ++i) {
      const Vec2 q{1.5 * u(rng), 1.5 * u(rng)};
      const Vec2 dv{u(rng), u(rng)};
      const FigureEightField f8;
      const GCState s8{q, drift_velocity(f8, p.drift, q) + dv};
      EXPECT_LT(symplecticity_defect([&](const GCState& z) { return slm_step(f8, z, p); }, f8, s8, h, 1e-5), 1e-5);
      const QuadraticField fq{1.0, 0.3};
      const GCState sq{q, drift_velocity(fq, p.drift, q) + dv};
      EXPECT_LT(symplecticity_defect([&](const GCState& z) { return slm_step(fq, z, p); }, fq, sq, h, 1e-5), 1e-5);
    }
  }
}

// Starting at v = X_H, the step leaves v - X_H(q') = O(hbar), so mu = O(hbar^2).
TEST(SlmStep, InvariantAfterOneStepFromDriftVelocityIsSecondOrder) {
  const FigureEightField f;
  const Vec2 q{1.4, 0.3};
  std::vector<double> hs, changes;
  for (double h : {0.01, 0.005, 0.0025}) {
    const SlmParams p = params(h);
    const GCState s{q, drift_velocity(f, p.drift, q)};
    hs.push_back(h);
    changes.push_back(mu_gc(f, p.drift, slm_step(f, s, p)));
  }
  EXPECT_NEAR(loglog_slope(hs, changes), 2.0, 0.1);
}

}  // namespace
}  // namespace geoint
