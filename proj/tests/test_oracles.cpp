#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <limits>

#include "coagfrag/oracles.hpp"

using namespace coagfrag::oracles;

namespace {

double integrate_half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace

TEST(Oracles, InitialConditions) {
  EXPECT_NEAR(scott_constant_kernel(1e-300, 0.0), 1.0, 1e-15);
  for (double x : {0.1, 1.0, 7.0}) {
    EXPECT_NEAR(scott_constant_kernel(x, 0.0), std::exp(-x), 1e-15);
    EXPECT_NEAR(linear_fragmentation(x, 0.0), std::exp(-x), 1e-15);
  }
}

TEST(Oracles, MomentsByQuadrature) {
  for (const auto& o : {scott_oracle(), linear_fragmentation_oracle()}) {
    for (double t : {0.0, 0.5, 2.0, 5.0}) {
      EXPECT_NEAR(integrate_half_line([&](double x) { return o.density(x, t); }), o.M0(t), 1e-12) << o.name;
      EXPECT_NEAR(integrate_half_line([&](double x) { return x * o.density(x, t); }), o.M1(t), 1e-12) << o.name;
    }
  }
  EXPECT_DOUBLE_EQ(scott_oracle().M0(2.0), 0.5);
  EXPECT_DOUBLE_EQ(linear_fragmentation_oracle().M0(1.0), 2.0);
}

TEST(Oracles, MomentOdeAgainstNumericalIntegration) {
  // dM/dt = -M^2/2 integrated by an independent adaptive solver.
  std::vector<double> m{1.0};
  boost::numeric::odeint::integrate_adaptive(
      boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<std::vector<double>>>(1e-13, 1e-13),
      [](const std::vector<double>& y, std::vector<double>& dy, double) { dy[0] = -0.5 * y[0] * y[0]; }, m, 0.0, 2.0,
      1e-3);
  EXPECT_NEAR(moment_ode_constant_kernel(1.0, 2.0), m[0], 1e-11);
  EXPECT_EQ(moment_ode_constant_kernel(3.0, 0.0), 3.0);
  double prev = 1.0;
  for (double t = 1.0; t < 1e6; t *= 10.0) {
    const double v = moment_ode_constant_kernel(1.0, t);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
  EXPECT_THROW(moment_ode_constant_kernel(0.0, 1.0), std::invalid_argument);
}

TEST(Oracles, TimeDerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (double x : {0.01, 0.5, 3.0}) {
    for (double t : {0.2, 1.0}) {
      EXPECT_NEAR(scott_constant_kernel_dt(x, t),
                  (scott_constant_kernel(x, t + h) - scott_constant_kernel(x, t - h)) / (2 * h), 1e-8);
      EXPECT_NEAR(linear_fragmentation_dt(x, t),
                  (linear_fragmentation(x, t + h) - linear_fragmentation(x, t - h)) / (2 * h), 1e-8);
    }
  }
}

TEST(Oracles, ResidualCertification) {
  const auto xs = certification_sizes();
  const auto ts = certification_times();
  EXPECT_LE(certify_residual(scott_oracle(), xs, ts).max_relative(), 1e-6);
  EXPECT_LE(certify_residual(linear_fragmentation_oracle(), xs, ts).max_relative(), 1e-6);
}

TEST(Oracles, ResidualDetectsWrongSolution) {
  OracleSolution bad = scott_oracle();
  bad.density = [](double x, double t) { return 1.0 / ((1.0 + t) * (1.0 + t)) * std::exp(-x / (1.0 + t)); };
  const auto xs = certification_sizes();
  const std::vector<double> ts{0.5, 1.0};
  EXPECT_GT(certify_residual(bad, xs, ts).max_relative(), 1e-2);
}
