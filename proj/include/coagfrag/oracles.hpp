#pragma once

// Closed-form solutions for exponential initial data u0 = e^-x, and a
// residual check that substitutes them into the full (untruncated) equation
// using adaptive quadrature independent of the sectional scheme.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coagfrag::oracles {

/// Constant kernel K = 1, no fragmentation: u = 4/(2+t)^2 exp(-2x/(2+t)).
inline double scott_constant_kernel(double x, double t) {
  const double s = 2.0 + t;
  return 4.0 / (s * s) * std::exp(-2.0 * x / s);
}

inline double scott_constant_kernel_dt(double x, double t) {
  const double s = 2.0 + t;
  return 4.0 * std::exp(-2.0 * x / s) / (s * s * s) * (2.0 * x / s - 2.0);
}

/// M0(t) = M0(0) / (1 + M0(0) t / 2), the number balance for K = 1.
inline double moment_ode_constant_kernel(double m0_initial, double t) {
  if (!(m0_initial > 0.0) || !(t >= 0.0)) throw std::invalid_argument("moment_ode_constant_kernel: bad arguments");
  return m0_initial / (1.0 + 0.5 * m0_initial * t);
}

/// K = 0, S(y) = y, b(x, y) = 2/y: u = (1+t)^2 exp(-x(1+t)).
inline double linear_fragmentation(double x, double t) {
  const double s = 1.0 + t;
  return s * s * std::exp(-x * s);
}

inline double linear_fragmentation_dt(double x, double t) {
  const double s = 1.0 + t;
  return std::exp(-x * s) * (2.0 * s - x * s * s);
}

struct OracleSolution {
  std::string name;
  std::function<double(double, double)> density;
  std::function<double(double, double)> density_dt;
  std::function<double(double)> M0;
  std::function<double(double)> M1;
  /// Full-equation ingredients the density is claimed to solve.
  std::function<double(double, double)> kernel;  ///< empty: no coagulation
  std::function<double(double)> selection;      ///< empty: no fragmentation
  std::function<double(double, double)> breakage;
};

inline OracleSolution scott_oracle() {
  return {"scott_constant_kernel",
          scott_constant_kernel,
          scott_constant_kernel_dt,
          [](double t) { return moment_ode_constant_kernel(1.0, t); },
          [](double) { return 1.0; },
          [](double, double) { return 1.0; },
          {},
          {}};
}

inline OracleSolution linear_fragmentation_oracle() {
  return {"linear_fragmentation",
          linear_fragmentation,
          linear_fragmentation_dt,
          [](double t) { return 1.0 + t; },
          [](double) { return 1.0; },
          {},
          [](double y) { return y; },
          [](double x, double y) { return x <= y ? 2.0 / y : 0.0; }};
}

struct ResidualPoint {
  double x;
  double t;
  double dudt;
  double rhs;
  double scale;  ///< sum of |term| over the four right-hand-side terms
  [[nodiscard]] double relative() const { return scale > 0.0 ? std::abs(dudt - rhs) / scale : std::abs(dudt - rhs); }
};

struct ResidualReport {
  std::string name;
  std::vector<ResidualPoint> points;
  [[nodiscard]] double max_relative() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.relative());
    return m;
  }
};

/// Evaluates the right-hand side of the full equation at (x, t) for the
/// oracle density and compares with its analytic time derivative.
inline ResidualPoint residual_at(const OracleSolution& o, double x, double t) {
  boost::math::quadrature::tanh_sinh<double> finite;
  boost::math::quadrature::exp_sinh<double> half_line;
  const auto u = [&](double z) { return o.density(z, t); };
  double birth_c = 0.0, death_c = 0.0, birth_f = 0.0, death_f = 0.0;
  if (o.kernel) {
    birth_c = 0.5 * finite.integrate([&](double y) { return o.kernel(x - y, y) * u(x - y) * u(y); }, 0.0, x);
    death_c = u(x) * half_line.integrate([&](double y) { return o.kernel(x, y) * u(y); }, 0.0,
                                         std::numeric_limits<double>::infinity());
  }
  if (o.selection) {
    birth_f = half_line.integrate([&](double y) { return o.breakage(x, y) * o.selection(y) * u(y); }, x,
                                  std::numeric_limits<double>::infinity());
    death_f = o.selection(x) * u(x);
  }
  const double rhs = birth_c - death_c + birth_f - death_f;
  return {x, t, o.density_dt(x, t), rhs, std::abs(birth_c) + std::abs(death_c) + std::abs(birth_f) + std::abs(death_f)};
}

inline ResidualReport certify_residual(const OracleSolution& o, std::span<const double> xs, std::span<const double> ts) {
  ResidualReport rep{o.name, {}};
  for (double t : ts) {
    for (double x : xs) rep.points.push_back(residual_at(o, x, t));
  }
  return rep;
}

/// Default certification grid: x log-spaced over [1e-3, 30], t in {0, 0.5, 1, 2}.
inline std::vector<double> certification_sizes() {
  std::vector<double> xs;
  for (int k = 0; k <= 24; ++k) xs.push_back(1e-3 * std::pow(30.0 / 1e-3, k / 24.0));
  return xs;
}

inline std::vector<double> certification_times() { return {0.0, 0.5, 1.0, 2.0}; }

}  // namespace coagfrag::oracles
