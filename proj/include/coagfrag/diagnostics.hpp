#pragma once

// Norms, a-priori envelopes and moduli for truncated solutions, evaluated on
// discrete trajectories.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coagfrag/grid.hpp"
#include "coagfrag/integrator.hpp"
#include "coagfrag/summation.hpp"

namespace coagfrag {

/// int (x + x^-2sigma) |u| dx on the grid.
inline double y_norm(const Grid& grid, const State& s, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("y_norm: sigma must be >= 0");
  return moment(grid, s, [sigma](double x) { return x + std::pow(x, -2.0 * sigma); });
}

/// L(T) = (e^{NT}(N+1) + e^{CT}(C+1) + 1) * ||u0||_Y.
inline double envelope_L(double T, double N, double C, double y0) {
  if (!(T >= 0.0) || !(N >= 1.0) || !(C >= 0.0) || !(y0 >= 0.0)) {
    throw std::invalid_argument("envelope_L: need T >= 0, N >= 1, C >= 0, y0 >= 0");
  }
  return (std::exp(N * T) * (N + 1.0) + std::exp(C * T) * (C + 1.0) + 1.0) * y0;
}

/// The constant obtained in the proof of the envelope bound,
/// 2 (e^{CT}(C+1) + 1) ||u0||_Y. Reported next to envelope_L.
inline double envelope_L_proof(double T, double C, double y0) {
  return 2.0 * (std::exp(C * T) * (C + 1.0) + 1.0) * y0;
}

/// kappa(r) = 1/2 (1 + r^sigma)(1 + r)^{2 lambda}.
inline double kappa_r(double r, double sigma, double lambda) {
  if (!(r > 0.0)) throw std::invalid_argument("kappa_r: r must be positive");
  return 0.5 * (1.0 + std::pow(r, sigma)) * std::pow(1.0 + r, 2.0 * lambda);
}

/// C_1 = 1 for lambda <= 1, 2^{lambda-1} otherwise.
inline double c1(double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("c1: lambda must be >= 0");
  return lambda <= 1.0 ? 1.0 : std::pow(2.0, lambda - 1.0);
}

/// Bounds on (x+y)^p in terms of x^p + y^p:
///   0 <= p <= 1: 2^{p-1}(x^p+y^p) <= (x+y)^p <= x^p + y^p
///   p >= 1:      x^p + y^p <= (x+y)^p <= 2^{p-1}(x^p+y^p)
///   p < 0:       (x+y)^p <= 2^{p-1}(x^p+y^p)   (no lower bound)
struct PowerSumBounds {
  double lower;
  double upper;
};

inline PowerSumBounds power_of_sum_bounds(double x, double y, double p) {
  const double s = std::pow(x, p) + std::pow(y, p);
  const double h = std::pow(2.0, p - 1.0) * s;
  if (p < 0.0) return {0.0, h};
  if (p <= 1.0) return {h, s};
  return {s, h};
}

/// Suggested tail radius R(eps) = 2 ||u0||_Y / eps.
inline double suggested_radius(double eps, double y0) {
  if (!(eps > 0.0)) throw std::invalid_argument("suggested_radius: eps must be positive");
  return 2.0 * y0 / eps;
}

/// int_R^inf (1 + x^-sigma) u dx over cells whose pivot exceeds R.
inline double tail_mass(const Grid& grid, const State& s, double R, double sigma) {
  if (!(R > 1.0)) throw std::invalid_argument("tail_mass: R must exceed 1");
  check_same_grid(grid, s);
  CompensatedSum acc;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = grid.pivot(i);
    if (x > R) acc.add((1.0 + std::pow(x, -sigma)) * s.N[i]);
  }
  return acc.value();
}

/// Greedy approximation of sup { int_A (1 + x^-sigma) u : A in (0, r), |A| < delta }.
/// The grid density is constant per cell, so filling the budget with the
/// densest cells first (last one fractionally) is optimal for it.
inline double uniform_integrability(const Grid& grid, const State& s, double delta, double r, double sigma) {
  if (!(delta > 0.0) || !(r > 0.0)) throw std::invalid_argument("uniform_integrability: need delta, r > 0");
  check_same_grid(grid, s);
  struct Piece {
    double density;
    double length;
  };
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double a = grid.lower(i);
    if (a >= r) break;
    const double b = std::min(grid.upper(i), r);
    const double w = grid.width(i);
    const double dens = (1.0 + std::pow(grid.pivot(i), -sigma)) * s.N[i] / w;
    pieces.push_back({dens, b - a});
  }
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.density > b.density; });
  double budget = delta;
  CompensatedSum acc;
  for (const Piece& p : pieces) {
    if (budget <= 0.0 || p.density <= 0.0) break;
    const double take = std::min(budget, p.length);
    acc.add(p.density * take);
    budget -= take;
  }
  return acc.value();
}

/// Natural log of [(B1+B2) L T delta^{(q-1)/q} + f(delta, 0)] exp(kappa(r) L T).
/// Returned as a log since the exponential overflows for realistic L.
inline double uniform_integrability_log_bound(double delta, double r, double T, double L, double sigma,
                                              double lambda, double B1, double B2, double q, double f0) {
  const double pre = (B1 + B2) * L * T * std::pow(delta, (q - 1.0) / q) + f0;
  if (pre <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(pre) + kappa_r(r, sigma, lambda) * L * T;
}

/// [(9/2) C_1^2 L^2 + (N+1) L] |t' - t|.
inline double modulus_bound(double lambda, double L, double N, double dt) {
  const double c = c1(lambda);
  return (4.5 * c * c * L * L + (N + 1.0) * L) * std::abs(dt);
}

struct ModulusCheck {
  double t0;
  double t1;
  double measured;
  double bound;
  [[nodiscard]] bool pass() const noexcept { return measured <= bound; }
};

/// Measured L1 time differences against the linear-in-time bound for each
/// requested pair of snapshot times.
inline std::vector<ModulusCheck> time_modulus(const Trajectory& traj, std::span<const std::pair<double, double>> pairs,
                                              double lambda, double L, double N) {
  std::vector<ModulusCheck> out;
  for (const auto& [a, b] : pairs) {
    const State* sa = traj.at(a);
    const State* sb = traj.at(b);
    if (sa == nullptr || sb == nullptr) {
      throw std::invalid_argument("time_modulus: no snapshot at t = " + std::to_string(sa ? b : a));
    }
    out.push_back({a, b, l1_distance(*sa, *sb), modulus_bound(lambda, L, N, b - a)});
  }
  return out;
}

/// sum_i (x_i^-sigma + x_i^{lambda-sigma}) |a_i - b_i|.
inline double weighted_distance(const Grid& grid, const State& a, const State& b, double sigma, double lambda) {
  check_same_grid(grid, a);
  check_same_grid(grid, b);
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = grid.pivot(i);
    acc.add((std::pow(x, -sigma) + std::pow(x, lambda - sigma)) * std::abs(a.N[i] - b.N[i]));
  }
  return acc.value();
}

struct DiagnosticsParams {
  double sigma = 0.0;
  double lambda = 0.0;
  double fragment_count = 1.0;  ///< N (nominal 1 without fragmentation)
  double h5_constant = 0.0;     ///< C
  double B1 = 0.0;
  double B2 = 0.0;
  double q = 1.5;
  double horizon = 1.0;
  double epsilon = 0.1;
  std::optional<double> tail_radius;  ///< defaults to suggested_radius(epsilon, ||u0||_Y)
  double delta = 1e-2;
  double window = 1.0;
  std::vector<std::pair<double, double>> modulus_pairs;  ///< extra pairs besides consecutive snapshots
};

struct SnapshotDiagnostics {
  double t = 0.0;
  double M0 = 0.0;
  double M1 = 0.0;
  double M_neg2sigma = 0.0;
  double y_norm = 0.0;
  double envelope_moment = 0.0;  ///< int (1 + x + x^-2sigma) u
  bool envelope_pass = true;
  double tail_value = 0.0;
  bool tail_pass = true;
  double f_delta = 0.0;
  double f_log_bound = 0.0;
  bool ui_pass = true;
  ModulusCheck modulus{0.0, 0.0, 0.0, 0.0};  ///< against the previous snapshot
};

struct DiagnosticsReport {
  double y0 = 0.0;
  double L = 0.0;
  double L_proof = 0.0;
  double tail_R = 0.0;
  double kappa_window = 0.0;
  std::vector<SnapshotDiagnostics> snapshots;
  std::vector<ModulusCheck> modulus_checks;
  std::vector<double> uniqueness_distances;

  [[nodiscard]] bool envelope_ok() const {
    return std::all_of(snapshots.begin(), snapshots.end(), [](const auto& s) { return s.envelope_pass; });
  }
  [[nodiscard]] bool tail_ok() const {
    return std::all_of(snapshots.begin(), snapshots.end(), [](const auto& s) { return s.tail_pass; });
  }
  [[nodiscard]] bool uniform_integrability_ok() const {
    return std::all_of(snapshots.begin(), snapshots.end(), [](const auto& s) { return s.ui_pass; });
  }
  [[nodiscard]] bool modulus_ok() const {
    return std::all_of(snapshots.begin(), snapshots.end(), [](const auto& s) { return s.modulus.pass(); }) &&
           std::all_of(modulus_checks.begin(), modulus_checks.end(), [](const auto& m) { return m.pass(); });
  }
  [[nodiscard]] bool all_pass() const { return envelope_ok() && tail_ok() && uniform_integrability_ok() && modulus_ok(); }
};

inline DiagnosticsReport diagnose(const Trajectory& traj, const DiagnosticsParams& p) {
  if (traj.snapshots.empty()) throw std::invalid_argument("diagnose: empty trajectory");
  const Grid& grid = traj.grid;
  const double sigma = p.sigma;
  DiagnosticsReport rep;
  const State& init = traj.snapshots.front();
  rep.y0 = y_norm(grid, init, sigma);
  rep.L = envelope_L(p.horizon, p.fragment_count, p.h5_constant, rep.y0);
  rep.L_proof = envelope_L_proof(p.horizon, p.h5_constant, rep.y0);
  rep.tail_R = p.tail_radius.value_or(std::max(suggested_radius(p.epsilon, rep.y0), std::nextafter(1.0, 2.0)));
  rep.kappa_window = kappa_r(p.window, sigma, p.lambda);
  const double f0 = uniform_integrability(grid, init, p.delta, p.window, sigma);
  const double log_bound = uniform_integrability_log_bound(p.delta, p.window, p.horizon, rep.L, sigma, p.lambda, p.B1,
                                                           p.B2, p.q, f0);

  const State* prev = nullptr;
  for (const State& s : traj.snapshots) {
    SnapshotDiagnostics d;
    d.t = s.t;
    d.M0 = number_moment(grid, s);
    d.M1 = mass_moment(grid, s);
    d.M_neg2sigma = power_moment(grid, s, -2.0 * sigma);
    d.y_norm = y_norm(grid, s, sigma);
    d.envelope_moment = moment(grid, s, [sigma](double x) { return 1.0 + x + std::pow(x, -2.0 * sigma); });
    d.envelope_pass = d.envelope_moment <= rep.L;
    d.tail_value = tail_mass(grid, s, rep.tail_R, sigma);
    d.tail_pass = d.tail_value <= p.epsilon;
    d.f_delta = uniform_integrability(grid, s, p.delta, p.window, sigma);
    d.f_log_bound = log_bound;
    d.ui_pass = d.f_delta == 0.0 || std::log(d.f_delta) <= log_bound * (1.0 + 1e-12) + 1e-12;
    if (prev != nullptr) {
      d.modulus = {prev->t, s.t, l1_distance(*prev, s), modulus_bound(p.lambda, rep.L, p.fragment_count, s.t - prev->t)};
    } else {
      d.modulus = {s.t, s.t, 0.0, 0.0};
    }
    rep.snapshots.push_back(d);
    prev = &s;
  }
  if (!p.modulus_pairs.empty()) {
    rep.modulus_checks = time_modulus(traj, p.modulus_pairs, p.lambda, rep.L, p.fragment_count);
  }
  return rep;
}

}  // namespace coagfrag
