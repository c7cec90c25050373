// SPDX-License-Identifier: Apache-2.0
//
// Trajectory runners, breakdown scans and the experiment presets.

#ifndef GEOINT_EXPERIMENTS_HPP
#define GEOINT_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "geoint/baselines.hpp"
#include "geoint/diagnostics.hpp"
#include "geoint/errors.hpp"
#include "geoint/fastslow.hpp"
#include "geoint/fields.hpp"
#include "geoint/slm.hpp"

namespace geoint {

enum class GcIntegrator { slm, rk4 };
enum class GravityIntegrator { fastslow, stiff_midpoint };

struct GcRecord {
  std::size_t step = 0;
  double t = 0.0;
  GCState state;
  double mu = 0.0;
  double energy = 0.0;
};

struct GravityRecord {
  std::size_t step = 0;
  double t = 0.0;
  FsState state;
  double mu0 = 0.0;
  double eslow = 0.0;
};

/// Where and why a run stopped early.
struct RunFailure {
  std::size_t step = 0;  // index of the step that could not be taken
  std::string reason;
};

/// Records for steps 0..n; on failure the records up to the last accepted
/// step are kept and `failure` is set.
template <class Record>
struct TimeSeries {
  std::vector<Record> records;
  std::optional<RunFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

using GcSeries = TimeSeries<GcRecord>;
using GravitySeries = TimeSeries<GravityRecord>;

template <MagneticField F>
GcRecord make_gc_record(const F& field, const DriftParams& dp, const GCState& s, std::size_t step, double step_time) {
  return {step, static_cast<double>(step) * step_time, s, mu_gc(field, dp, s), dp.mu_eff() * b_value(field, s.q)};
}

/// Runs the symplectic Lorentz map or RK4 on the reduced flow. RK4 carries
/// no fiber velocity, so its records hold v = X_H(q) and mu = 0. Time per
/// step is hbar * tau; RK4 uses h = hbar.
template <MagneticField F>
GcSeries run_gc(const F& field, const SlmParams& p, const GCState& initial, std::size_t n_steps,
                GcIntegrator integrator) {
  p.validate();
  const double step_time = p.hbar * p.drift.tau;
  GcSeries out;
  out.records.reserve(n_steps + 1);
  GCState s = initial;
  if (integrator == GcIntegrator::rk4) s.v = drift_velocity(field, p.drift, s.q);
  out.records.push_back(make_gc_record(field, p.drift, s, 0, step_time));
  for (std::size_t n = 1; n <= n_steps; ++n) {
    try {
      if (integrator == GcIntegrator::slm) {
        s = slm_step(field, s, p);
      } else {
        s.q = rk4_step(field, p.drift, s.q, p.hbar);
        s.v = drift_velocity(field, p.drift, s.q);
      }
      out.records.push_back(make_gc_record(field, p.drift, s, n, step_time));
    } catch (const Error& e) {
      out.failure = RunFailure{n, e.what()};
      break;
    }
  }
  return out;
}

inline GcSeries run_gc(const AnyField& field, const SlmParams& p, const GCState& initial, std::size_t n_steps,
                       GcIntegrator integrator) {
  return std::visit([&](const auto& f) { return run_gc(f, p, initial, n_steps, integrator); }, field);
}

/// |P|^2 / 2 + V(Q) + q^2 W(Q).
template <SlowPotential Pot>
double slow_energy(const Pot& pot, const FsState& s) {
  const PotentialValues pv = pot.evaluate(s.Q);
  return 0.5 * dot(s.P, s.P) + pv.v + s.q * s.q * pv.w;
}

/// Settings shared by both gravity integrators. The fast-slow map uses
/// hbar and theta0; the stiff midpoint rule uses h = hbar / eps.
struct GravityParams {
  FsParams fs;

  StiffParams stiff() const { return {fs.step_size(), fs.eps, fs.fp_tol, fs.fp_max_iter}; }
};

template <SlowPotential Pot>
GravitySeries run_gravity(const Pot& pot, const GravityParams& gp, const FsState& initial, std::size_t n_steps,
                          GravityIntegrator integrator) {
  gp.fs.validate();
  const StiffParams sp = gp.stiff();
  sp.validate();
  const double step_time = gp.fs.step_size();
  GravitySeries out;
  out.records.reserve(n_steps + 1);
  FsState s = initial;
  auto record = [&](std::size_t n) -> GravityRecord {
    return {n, static_cast<double>(n) * step_time, s, mu_fast(s.q, s.p), slow_energy(pot, s)};
  };
  try {
    out.records.push_back(record(0));
  } catch (const Error& e) {
    out.failure = RunFailure{0, e.what()};
    return out;
  }
  for (std::size_t n = 1; n <= n_steps; ++n) {
    try {
      s = integrator == GravityIntegrator::fastslow ? fs_step(s, pot, gp.fs) : stiff_midpoint_step(s, pot, sp).state;
      out.records.push_back(record(n));
    } catch (const Error& e) {
      out.failure = RunFailure{n, e.what()};
      break;
    }
  }
  return out;
}

inline GravitySeries run_gravity(const AnyPotential& pot, const GravityParams& gp, const FsState& initial,
                                 std::size_t n_steps, GravityIntegrator integrator) {
  return std::visit([&](const auto& p) { return run_gravity(p, gp, initial, n_steps, integrator); }, pot);
}

enum class SweepParameter { theta0, hbar };

inline const char* to_string(SweepParameter p) { return p == SweepParameter::theta0 ? "theta0" : "hbar"; }

struct SweepSpec {
  SweepParameter parameter = SweepParameter::hbar;
  std::vector<double> values;
  std::size_t step_budget = 5'000'000;
  SlmParams base;
  Vec2 q0{2.0, 0.0};
  BreakdownConfig breakdown;
  unsigned jobs = 1;

  void validate() const {
    breakdown.validate();
    if (step_budget <= breakdown.amplitude_window + breakdown.window)
      throw DomainError("step budget must exceed amplitude_window + window");
    if (jobs == 0) throw DomainError("jobs must be >= 1");
    for (double v : values) {
      if (!std::isfinite(v)) throw DomainError("sweep values must be finite");
      if (parameter == SweepParameter::theta0 && !(v > 0.0 && v < std::numbers::pi))
        throw DomainError("theta0 sweep values must lie in (0, pi)");
      if (parameter == SweepParameter::hbar && !(v > 0.0)) throw DomainError("hbar sweep values must be > 0");
    }
  }
};

enum class ScanStatus { breakdown, budget, error };

inline const char* to_string(ScanStatus s) {
  switch (s) {
    case ScanStatus::breakdown: return "breakdown";
    case ScanStatus::budget: return "budget";
    case ScanStatus::error: return "error";
  }
  return "error";
}

struct ScanRow {
  SweepParameter parameter = SweepParameter::hbar;
  double value = 0.0;
  std::optional<double> t_breakdown;
  ScanStatus status = ScanStatus::budget;
  std::size_t steps = 0;  // steps actually taken
  std::string message;    // error text when status == error
};

/// Breakdown time of one slm trajectory on `field`. The invariant series is
/// tested at doubling lengths so early breakdowns stop the run; a prefix
/// test only reports indices whose averaging window is complete, which
/// makes the answer independent of where the run stopped.
template <MagneticField F>
ScanRow breakdown_point(const F& field, const SlmParams& p, Vec2 q0, std::size_t budget, const BreakdownConfig& cfg) {
  ScanRow row;
  const double step_time = p.hbar * p.drift.tau;
  std::vector<double> mu;
  try {
    p.validate();
    GCState s{q0, drift_velocity(field, p.drift, q0)};
    mu.reserve(std::min<std::size_t>(budget + 1, 1u << 20));
    mu.push_back(mu_gc(field, p.drift, s));
    std::size_t check_at = 2 * (cfg.amplitude_window + cfg.window);
    while (mu.size() < budget + 1) {
      const std::size_t target = std::min(check_at, budget + 1);
      while (mu.size() < target) {
        s = slm_step(field, s, p);
        mu.push_back(mu_gc(field, p.drift, s));
      }
      const bool final_check = mu.size() == budget + 1;
      if (const auto idx = detail::first_breakdown_index(mu, cfg, final_check)) {
        row.t_breakdown = static_cast<double>(*idx) * step_time;
        row.status = ScanStatus::breakdown;
        row.steps = mu.size() - 1;
        return row;
      }
      check_at *= 2;
    }
    row.status = ScanStatus::budget;
  } catch (const Error& e) {
    row.status = ScanStatus::error;
    row.message = e.what();
  }
  row.steps = mu.empty() ? 0 : mu.size() - 1;
  return row;
}

/// Breakdown times over a theta0 or hbar sweep on the figure-eight field.
/// Points run on `spec.jobs` threads; rows keep the input order.
inline std::vector<ScanRow> scan_breakdown(const SweepSpec& spec) {
  spec.validate();
  std::vector<ScanRow> rows(spec.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SlmParams p = spec.base;
      if (spec.parameter == SweepParameter::theta0) {
        p.theta0 = spec.values[i];
      } else {
        p.hbar = spec.values[i];
      }
      rows[i] = breakdown_point(FigureEightField{}, p, spec.q0, spec.step_budget, spec.breakdown);
      rows[i].parameter = spec.parameter;
      rows[i].value = spec.values[i];
    }
  };
  const unsigned n_threads = std::min<std::size_t>(spec.jobs, std::max<std::size_t>(rows.size(), 1));
  if (n_threads <= 1) {
    worker();
    return rows;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope needs >= 2 paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace presets {

/// Quadratic field with tau = 1 / alpha, q = (1, 1), v = X_H(q), 60000 steps.
struct OrbitRadius {
  QuadraticField field{1.0, 0.001};
  SlmParams params = [] {
    SlmParams p;
    p.hbar = 0.1;
    p.theta0 = 2.0;
    p.drift = {1.0, 1000.0};
    return p;
  }();
  Vec2 q0{1.0, 1.0};
  std::size_t steps = 60000;

  GCState initial() const { return {q0, drift_velocity(field, params.drift, q0)}; }
};

/// Figure-eight field, hbar = 0.05, tau = 1, 6000 steps from seven starts:
/// four inside the lobes of {B < 2}, three outside.
struct InvariantBeating {
  FigureEightField field;
  SlmParams params = [] {
    SlmParams p;
    p.hbar = 0.05;
    p.theta0 = 2.0;
    p.drift = {1.0, 1.0};
    return p;
  }();
  std::size_t steps = 6000;

  static std::vector<Vec2> positions() {
    return {{1.0, 0.0}, {-1.0, 0.0}, {1.6, 0.3}, {-1.6, -0.3}, {0.0, 1.0}, {2.3, 0.0}, {0.0, -1.5}};
  }

  /// v = X_H(q) + 1.5 u with u cycling through the four axis directions.
  std::vector<GCState> initial() const {
    static constexpr Vec2 dirs[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    std::vector<GCState> out;
    const auto qs = positions();
    for (std::size_t i = 0; i < qs.size(); ++i)
      out.push_back({qs[i], drift_velocity(field, params.drift, qs[i]) + 1.5 * dirs[i % 4]});
    return out;
  }
};

/// Two bodies on mirror-image orbits (Q2 = -Q1) with the oscillator at
/// (q, p) = (1, 0). The speed makes the orbit circular for the averaged
/// coupling <q^2> = 1/2.
inline FsState gravity_initial() {
  const double v = std::sqrt(1.0 + 0.125);
  return {1.0, 0.0, {1.0, 0.0, -1.0, 0.0}, {0.0, v, 0.0, -v}};
}

inline constexpr double kGravityEps = 0.001;
inline constexpr double kGravityHorizon = 10000.0;

}  // namespace presets

}  // namespace geoint

#endif  // GEOINT_EXPERIMENTS_HPP
