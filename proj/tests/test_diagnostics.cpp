#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coagfrag/diagnostics.hpp"

using namespace coagfrag;

namespace {

State exponential_state(const Grid& g) {
  return truncate_initial([](double x) { return std::exp(-x); }, g.x_max(), g);
}

}  // namespace

TEST(Diagnostics, YNormOfExponential) {
  const Grid g(1e-9, 60.0, 1200);
  const State s = exponential_state(g);
  EXPECT_NEAR(y_norm(g, s, 0.0), 2.0, 1e-4);
  EXPECT_NEAR(y_norm(g, s, 0.25), 1.0 + std::sqrt(M_PI), 1e-3);
  EXPECT_EQ(y_norm(g, State(g.size()), 0.25), 0.0);
}

TEST(Diagnostics, EnvelopeL) {
  EXPECT_DOUBLE_EQ(envelope_L(0.0, 2.0, 1.0, 1.0), 6.0);
  EXPECT_NEAR(envelope_L(std::log(2.0), 2.0, 1.0, 1.0), 17.0, 1e-12);
  EXPECT_DOUBLE_EQ(envelope_L(0.7, 1.5, 3.0, 2.0), 2.0 * envelope_L(0.7, 1.5, 3.0, 1.0));
  EXPECT_THROW(envelope_L(1.0, 0.5, 1.0, 1.0), std::invalid_argument);
  // monotone in every argument
  const double base = envelope_L(1.0, 2.0, 1.0, 1.0);
  EXPECT_GT(envelope_L(1.1, 2.0, 1.0, 1.0), base);
  EXPECT_GT(envelope_L(1.0, 2.1, 1.0, 1.0), base);
  EXPECT_GT(envelope_L(1.0, 2.0, 1.1, 1.0), base);
  EXPECT_DOUBLE_EQ(envelope_L_proof(0.0, 1.0, 1.0), 6.0);
}

TEST(Diagnostics, KappaAndC1) {
  EXPECT_NEAR(kappa_r(1.0, 1.0 / 3.0, 2.0 / 3.0), std::pow(2.0, 4.0 / 3.0), 1e-14);
  EXPECT_DOUBLE_EQ(kappa_r(17.0, 0.0, 0.0), 1.0);
  EXPECT_NEAR(kappa_r(3.0, 0.5, 0.5), 2.0 * (1.0 + std::sqrt(3.0)), 1e-14);
  EXPECT_EQ(c1(0.5), 1.0);
  EXPECT_EQ(c1(1.0), 1.0);
  EXPECT_NEAR(c1(7.0 / 6.0), std::pow(2.0, 1.0 / 6.0), 1e-15);
}

TEST(Diagnostics, PowerOfSumInequalities) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lg(-6.0, 6.0);
  for (double p : {-1.0, -0.5, 0.3, 1.0, 2.0}) {
    for (int i = 0; i < 2000; ++i) {
      const double x = std::pow(10.0, lg(rng));
      const double y = std::pow(10.0, lg(rng));
      const auto b = power_of_sum_bounds(x, y, p);
      const double v = std::pow(x + y, p);
      ASSERT_LE(b.lower, v * (1.0 + 1e-13)) << p;
      ASSERT_LE(v, b.upper * (1.0 + 1e-13)) << p;
    }
  }
}

TEST(Diagnostics, TailMass) {
  const Grid g(1e-4, 1e3, 160);
  const State s = exponential_state(g);
  EXPECT_DOUBLE_EQ(suggested_radius(0.1, 1.0), 20.0);
  EXPECT_LE(tail_mass(g, s, 20.0, 0.0), 0.1);
  State low(g.size());
  low.N[0] = 1.0;
  EXPECT_EQ(tail_mass(g, low, 5.0, 0.3), 0.0);
  EXPECT_THROW(tail_mass(g, s, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(tail_mass(g, s, 0.5, 0.0), std::invalid_argument);
}

TEST(Diagnostics, UniformIntegrabilityLimits) {
  const Grid g(1e-3, 10.0, 80);
  const State s = exponential_state(g);
  const double full = moment(g, s, [](double x) { return 1.0 + std::pow(x, -0.25); });
  EXPECT_NEAR(uniform_integrability(g, s, 20.0, 10.0, 0.25), full, 1e-12 * full);
  EXPECT_LT(uniform_integrability(g, s, 1e-12, 10.0, 0.25), 1e-10);
  // sigma = 0, density bounded by U = 1: f(delta) <= 2 U delta
  for (double d : {1e-3, 1e-2, 0.1, 1.0}) EXPECT_LE(uniform_integrability(g, s, d, 10.0, 0.0), 2.0 * d);
}

TEST(Diagnostics, GreedyMatchesContiguousBruteForceOnUnimodalProfile) {
  const Grid g(1e-2, 20.0, 40);
  const State s = truncate_initial([](double x) { return x * x * std::exp(-x); }, 20.0, g);
  const double r = 20.0;
  for (double delta : {0.05, 0.5, 2.0, 7.0}) {
    // weighted density per cell, sigma = 0
    std::vector<double> dens(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) dens[i] = 2.0 * s.N[i] / g.width(i);
    double best = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      double len = 0.0, val = 0.0;
      for (std::size_t b = a; b <= g.size(); ++b) {
        // whole cells [a, b) plus a fractional piece of a neighbour
        const double rest = delta - len;
        if (rest < 0.0) break;
        double extra = 0.0;
        if (b < g.size()) extra = std::max(extra, dens[b] * std::min(rest, g.width(b)));
        if (a > 0) extra = std::max(extra, dens[a - 1] * std::min(rest, g.width(a - 1)));
        best = std::max(best, val + extra);
        if (b == g.size()) break;
        len += g.width(b);
        val += dens[b] * g.width(b);
      }
    }
    EXPECT_NEAR(uniform_integrability(g, s, delta, r, 0.0), best, 1e-12 * best) << delta;
  }
}

TEST(Diagnostics, ModulusBound) {
  EXPECT_DOUBLE_EQ(modulus_bound(0.5, 2.0, 1.0, 0.1), (4.5 * 4.0 + 2.0 * 2.0) * 0.1);
  EXPECT_DOUBLE_EQ(modulus_bound(0.5, 2.0, 1.0, 0.0), 0.0);
  EXPECT_NEAR(modulus_bound(7.0 / 6.0, 1.0, 1.0, -1.0), 4.5 * std::pow(2.0, 1.0 / 3.0) + 2.0, 1e-13);
}

TEST(Diagnostics, WeightedDistanceIsMetric) {
  const Grid g(1e-3, 50.0, 30);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rnd = [&] {
    State s(g.size());
    for (double& v : s.N) v = u(rng);
    return s;
  };
  for (int i = 0; i < 50; ++i) {
    const State a = rnd(), b = rnd(), c = rnd();
    const double ab = weighted_distance(g, a, b, 1.0 / 3.0, 2.0 / 3.0);
    EXPECT_EQ(ab, weighted_distance(g, b, a, 1.0 / 3.0, 2.0 / 3.0));
    EXPECT_LE(ab, weighted_distance(g, a, c, 1.0 / 3.0, 2.0 / 3.0) + weighted_distance(g, c, b, 1.0 / 3.0, 2.0 / 3.0) + 1e-12);
    EXPECT_GT(ab, 0.0);
    EXPECT_EQ(weighted_distance(g, a, a, 1.0 / 3.0, 2.0 / 3.0), 0.0);
    EXPECT_NEAR(weighted_distance(g, a, b, 0.0, 0.0), 2.0 * l1_distance(a, b), 1e-12);
  }
  EXPECT_THROW(weighted_distance(g, State(3), State(3), 0.0, 0.0), GridError);
}

TEST(Diagnostics, ConstantKernelRunPassesAllBounds) {
  Scenario sc;
  sc.truncation = {1e3, 0.0};
  sc.grid = {160, 1e-4};
  sc.horizon = 2.0;
  sc.snapshots = {0.1, 0.5, 1.0, 2.0};
  const Trajectory t = run(sc);
  DiagnosticsParams p;
  p.horizon = 2.0;
  p.modulus_pairs = {{0.0, 0.1}, {0.1, 0.1}};
  const auto rep = diagnose(t, p);
  EXPECT_TRUE(rep.all_pass());
  ASSERT_EQ(rep.modulus_checks.size(), 2u);
  EXPECT_GE(rep.modulus_checks[0].bound / rep.modulus_checks[0].measured, 1.0);
  EXPECT_EQ(rep.modulus_checks[1].measured, 0.0);
  EXPECT_EQ(rep.modulus_checks[1].bound, 0.0);
  EXPECT_NEAR(rep.tail_R, 2.0 * rep.y0 / 0.1, 1e-12);
  for (const auto& s : rep.snapshots) {
    EXPECT_TRUE(std::isfinite(s.y_norm));
    EXPECT_EQ(s.envelope_pass, s.envelope_moment <= rep.L);
    EXPECT_EQ(s.tail_pass, s.tail_value <= 0.1);
  }
}

TEST(Diagnostics, ZeroInitialDataGivesZeroModulus) {
  Scenario sc;
  sc.initial = [](double) { return 0.0; };
  sc.horizon = 0.5;
  const Trajectory t = run(sc);
  const std::pair<double, double> pair{0.0, 0.5};
  const auto m = time_modulus(t, std::span(&pair, 1), 0.0, 0.0, 1.0);
  EXPECT_EQ(m[0].measured, 0.0);
  EXPECT_EQ(m[0].bound, 0.0);
  EXPECT_TRUE(m[0].pass());
}
