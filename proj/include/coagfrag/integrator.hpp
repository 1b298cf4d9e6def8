#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coagfrag/discretization.hpp"
#include "coagfrag/grid.hpp"
#include "coagfrag/kernels.hpp"
#include "coagfrag/truncation.hpp"

namespace coagfrag {

enum class Method { Euler, RK4 };

[[nodiscard]] constexpr int order(Method m) noexcept { return m == Method::Euler ? 1 : 4; }

[[nodiscard]] inline const char* to_string(Method m) noexcept { return m == Method::Euler ? "euler" : "rk4"; }

struct IntegratorOptions {
  Method method = Method::RK4;
  bool adaptive = true;
  double rtol = 1e-6;
  double dt_initial = 1e-3;
  double dt_min = 1e-12;
  /// Step for non-adaptive runs (shortened to land on snapshots).
  double dt_fixed = 1e-3;
  /// Negative entries above -clamp_tol * max|N| are rounding and get clamped.
  double clamp_tol = 1e-14;
  std::size_t max_steps = 10'000'000;
};

struct GridSpec {
  std::size_t cells = 160;
  std::optional<double> x_min;
};

struct Scenario {
  CoagulationKernel kernel = kernels::constant();
  std::optional<FragmentationModel> fragmentation;
  TruncationParams truncation{100.0, 0.0};
  GridSpec grid;
  DensityFn initial = [](double x) { return std::exp(-x); };
  double horizon = 1.0;
  std::vector<double> snapshots;  ///< sorted, within [0, horizon]; horizon is always added
  IntegratorOptions integrator;

  [[nodiscard]] double grid_floor() const { return grid.x_min.value_or(truncation.default_grid_floor()); }
  [[nodiscard]] Grid make_grid() const { return build_grid(grid_floor(), truncation.n, grid.cells); }

  [[nodiscard]] const FragmentationModel* fragmentation_ptr() const {
    return fragmentation ? &*fragmentation : nullptr;
  }

  void validate() const {
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("scenario: horizon must be >= 0");
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
      if (!(snapshots[i] >= 0.0 && snapshots[i] <= horizon)) {
        throw std::invalid_argument("scenario: snapshot times must lie in [0, horizon]");
      }
      if (i > 0 && !(snapshots[i] > snapshots[i - 1])) {
        throw std::invalid_argument("scenario: snapshot times must be strictly increasing");
      }
    }
    if (!(grid_floor() > 0.0 && grid_floor() < truncation.n)) {
      throw std::invalid_argument("scenario: grid floor must lie in (0, n)");
    }
  }
};

struct StepResult {
  State state;
  bool rejected = false;
  double clamped_mass = 0.0;
};

struct StepRecord {
  double t;
  double dt;
  bool rejected;
};

struct Trajectory {
  Grid grid;
  std::vector<State> snapshots;
  std::vector<StepRecord> steps;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double clamped_mass = 0.0;
  /// Sum of local L1 error estimates (adaptive runs only).
  double estimated_error = 0.0;
  bool completed = true;
  std::string failure;

  [[nodiscard]] const State& final_state() const { return snapshots.back(); }

  [[nodiscard]] const State* at(double t, double tol = 1e-12) const {
    for (const State& s : snapshots) {
      if (std::abs(s.t - t) <= tol * std::max(1.0, std::abs(t))) return &s;
    }
    return nullptr;
  }
};

namespace detail {

inline void axpy(std::vector<double>& out, const std::vector<double>& y, double a, const std::vector<double>& k) {
  out.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * k[i];
}

}  // namespace detail

/// One explicit step. Entries below -clamp_tol * max|N| reject the step;
/// smaller negatives are clamped to zero and their mass is reported.
inline StepResult step(const SectionalOperator& op, const State& state, double dt, Method method,
                       double clamp_tol = 1e-14) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const std::vector<double>& y = state.N;
  std::vector<double> next;
  if (method == Method::Euler) {
    std::vector<double> k1;
    op.rate(state, k1);
    detail::axpy(next, y, dt, k1);
  } else {
    std::vector<double> k1, k2, k3, k4, tmp;
    op.rate(state, k1);
    detail::axpy(tmp, y, 0.5 * dt, k1);
    op.rate(State(state.t + 0.5 * dt, tmp), k2);
    detail::axpy(tmp, y, 0.5 * dt, k2);
    op.rate(State(state.t + 0.5 * dt, tmp), k3);
    detail::axpy(tmp, y, dt, k3);
    op.rate(State(state.t + dt, tmp), k4);
    next.resize(y.size());
    const double h6 = dt / 6.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      next[i] = y[i] + h6 * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
    }
  }

  StepResult res;
  double scale = 0.0;
  for (double v : next) {
    if (!std::isfinite(v)) throw NumericError("step: non-finite value after step");
    scale = std::max(scale, std::abs(v));
  }
  const double threshold = clamp_tol * scale;
  const Grid& grid = op.grid();
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (next[i] < 0.0) {
      if (next[i] < -threshold) {
        res.rejected = true;
        res.state = state;
        return res;
      }
      res.clamped_mass += -next[i] * grid.pivot(i);
      next[i] = 0.0;
    }
  }
  res.state = State(state.t + dt, std::move(next));
  return res;
}

/// Integrates from the truncated initial data to the horizon, landing exactly
/// on every snapshot time. A step size below dt_min stops the run and returns
/// the partial trajectory with `completed == false`.
inline Trajectory run(const Scenario& sc, const SectionalOperator& op) {
  sc.validate();
  const IntegratorOptions& opt = sc.integrator;
  Trajectory traj;
  traj.grid = op.grid();

  std::vector<double> targets = sc.snapshots;
  if (targets.empty() || targets.back() < sc.horizon) targets.push_back(sc.horizon);

  State y = truncate_initial(sc.initial, sc.truncation.n, traj.grid);
  y.t = 0.0;
  // t = 0 is always the first snapshot
  traj.snapshots.push_back(y);
  std::size_t next_target = (targets.front() == 0.0) ? 1 : 0;

  const int p = order(opt.method);
  double dt = opt.adaptive ? opt.dt_initial : opt.dt_fixed;
  std::size_t steps = 0;

  while (next_target < targets.size()) {
    const double target = targets[next_target];
    if (target <= y.t) {
      ++next_target;
      continue;
    }
    if (++steps > opt.max_steps) {
      traj.completed = false;
      traj.failure = "step budget exhausted at t = " + std::to_string(y.t);
      return traj;
    }
    double h = std::min(dt, target - y.t);
    const bool lands = (y.t + h >= target) || (target - (y.t + h) <= 1e-14 * std::max(1.0, target));
    if (lands) h = target - y.t;

    if (h < opt.dt_min && !lands) {
      traj.completed = false;
      traj.failure = "step size underflow (dt = " + std::to_string(h) + ") at t = " + std::to_string(y.t);
      return traj;
    }

    StepResult accepted;
    double err_l1 = 0.0;
    bool ok = false;
    double next_dt = dt;
    if (!opt.adaptive) {
      accepted = step(op, y, h, opt.method, opt.clamp_tol);
      ok = !accepted.rejected;
      if (!ok) {
        dt = 0.5 * h;
        next_dt = dt;
      }
    } else {
      StepResult full = step(op, y, h, opt.method, opt.clamp_tol);
      StepResult half = full.rejected ? full : step(op, y, 0.5 * h, opt.method, opt.clamp_tol);
      StepResult two = half.rejected ? half : step(op, half.state, 0.5 * h, opt.method, opt.clamp_tol);
      if (full.rejected || half.rejected || two.rejected) {
        next_dt = 0.5 * h;
      } else {
        CompensatedSum diff, norm;
        for (std::size_t i = 0; i < y.size(); ++i) {
          diff.add(std::abs(two.state.N[i] - full.state.N[i]));
          norm.add(std::abs(y.N[i]));
        }
        err_l1 = diff.value() / (std::pow(2.0, p) - 1.0);
        const double denom = opt.rtol * norm.value();
        const double err = denom > 0.0 ? err_l1 / denom : (err_l1 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        const double factor = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(err, -1.0 / (p + 1)), 0.2, 4.0);
        next_dt = h * factor;
        if (err <= 1.0) {
          ok = true;
          accepted = std::move(two);
          accepted.clamped_mass += half.clamped_mass;
        }
      }
    }

    traj.steps.push_back({y.t, h, !ok});
    if (!ok) {
      ++traj.rejected_steps;
      dt = next_dt;
      if (dt < opt.dt_min) {
        traj.completed = false;
        traj.failure = "step size underflow (dt = " + std::to_string(dt) + ") at t = " + std::to_string(y.t);
        return traj;
      }
      continue;
    }
    ++traj.accepted_steps;
    traj.clamped_mass += accepted.clamped_mass;
    traj.estimated_error += err_l1;
    y = std::move(accepted.state);
    if (lands) {
      y.t = target;
      traj.snapshots.push_back(y);
      ++next_target;
      // a landing step may be artificially short; keep the controller's size
      if (opt.adaptive) dt = std::max(next_dt, dt);
    } else {
      dt = opt.adaptive ? next_dt : opt.dt_fixed;
    }
  }
  return traj;
}

inline Trajectory run(const Scenario& sc) {
  sc.validate();
  const SectionalOperator op(sc.make_grid(), sc.kernel, sc.fragmentation_ptr(), sc.truncation);
  return run(sc, op);
}

}  // namespace coagfrag
