#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coagfrag/discretization.hpp"

using namespace coagfrag;

namespace {

State random_state(std::size_t m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  State s(m);
  for (double& v : s.N) v = u(rng) * u(rng);
  return s;
}

double weighted(const Grid& g, const std::vector<double>& v, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += std::pow(g.pivot(i), p) * v[i];
  return acc;
}

}  // namespace

TEST(BuildGrid, Examples) {
  const Grid g = build_grid(1.0, 4.0, 2);
  EXPECT_DOUBLE_EQ(g.edges()[1], 2.0);
  EXPECT_DOUBLE_EQ(g.pivot(0), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(g.pivot(1), 2.0 * std::sqrt(2.0));
  EXPECT_NEAR(build_grid(1e-4, 10.0, 100).ratio(), std::pow(10.0, 0.05), 1e-13);
}

TEST(Assemble, ZeroStateGivesZeroRates) {
  const auto frag = power_law_fragmentation(0.5, 0.5);
  const Grid g(1e-3, 100.0, 40);
  const auto b = assemble_rhs(State(40), kernels::smoluchowski(), &frag, {100.0, 1.0 / 3.0}, g);
  for (const auto* v : {&b.birth_coag, &b.death_coag, &b.birth_frag, &b.death_frag}) {
    for (double x : *v) EXPECT_EQ(x, 0.0);
  }
}

TEST(Assemble, MassConservedForAnyState) {
  const auto frag = power_law_fragmentation(0.5, 0.5);
  const Grid g(1.0 / 300.0, 100.0, 96);
  const SectionalOperator op(g, kernels::smoluchowski(), &frag, {100.0, 1.0 / 3.0});
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const State s = random_state(g.size(), seed);
    const auto b = op.assemble(s);
    const double scale = weighted(g, b.birth_coag, 1.0) + weighted(g, b.death_frag, 1.0);
    std::vector<double> total = b.total();
    EXPECT_LE(std::abs(weighted(g, total, 1.0)), 1e-12 * scale);
    EXPECT_NEAR(weighted(g, b.birth_coag, 1.0), weighted(g, b.death_coag, 1.0), 1e-12 * scale);
    EXPECT_NEAR(weighted(g, b.birth_frag, 1.0), weighted(g, b.death_frag, 1.0), 1e-12 * scale);
  }
}

TEST(Assemble, CoagulationNumberBalanceAgainstBruteForce) {
  const TruncationParams p(50.0, 1.0 / 3.0);
  const Grid g(1e-2, 50.0, 64);
  const auto k = kernels::smoluchowski();
  const SectionalOperator op(g, k, nullptr, p);
  const State s = random_state(g.size(), 99);
  const auto b = op.assemble(s);
  // Events with both parents active and the merged pivot size on the grid.
  double events = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double x = g.pivot(i), y = g.pivot(j);
      if (x + y > g.pivot(g.size() - 1) || !in_truncation_support(x, y, p)) continue;
      events += 0.5 * k(x, y) * s.N[i] * s.N[j];
    }
  }
  const double born = weighted(g, b.birth_coag, 0.0);
  const double died = weighted(g, b.death_coag, 0.0);
  EXPECT_NEAR(born, events, 1e-12 * events);
  EXPECT_NEAR(died, 2.0 * events, 1e-12 * events);
  EXPECT_NEAR(born, 0.5 * died, 1e-12 * died);
}

TEST(Assemble, ConstantKernelNumberDerivative) {
  // All mass low enough that every pair stays on the grid: dM0/dt = -M0^2 / 2.
  const Grid g(1e-3, 1e3, 90);
  State s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.pivot(i) < 1.0) s.N[i] = 0.05;
  }
  const double m0 = number_moment(g, s);
  for (double& v : s.N) v *= 2.0 / m0;
  const SectionalOperator op(g, kernels::constant(), nullptr, {1e3, 0.0});
  std::vector<double> r;
  op.rate(s, r);
  EXPECT_NEAR(weighted(g, r, 0.0), -2.0, 1e-12);
}

TEST(Assemble, SinglePairLandsOnBracketingPivots) {
  const Grid g(1.0, 1024.0, 30);
  State s(g.size());
  const std::size_t i = 7;
  s.N[i] = 3.0;
  const auto b = SectionalOperator(g, kernels::constant(2.0), nullptr, {1024.0, 0.0}).assemble(s);
  const double v = 2.0 * g.pivot(i);
  const std::size_t k = g.cell_of(v) - (g.pivot(g.cell_of(v)) > v ? 1 : 0);
  const double flux = 0.5 * 2.0 * 9.0;
  const double w_hi = (v - g.pivot(k)) / (g.pivot(k + 1) - g.pivot(k));
  EXPECT_NEAR(b.birth_coag[k], flux * (1.0 - w_hi), 1e-12);
  EXPECT_NEAR(b.birth_coag[k + 1], flux * w_hi, 1e-12);
  EXPECT_NEAR(b.death_coag[i], 2.0 * flux, 1e-12);
  EXPECT_NEAR(weighted(g, b.birth_coag, 1.0), flux * v, 1e-10);
}

TEST(Assemble, LinearFragmentationSingleParent) {
  const auto frag = power_law_fragmentation(0.0, 1.0);
  const Grid g(1e-6, 50.0, 200);
  State s(g.size());
  const std::size_t j = 150;
  s.N[j] = 1.0;
  const auto b = SectionalOperator(g, kernels::constant(0.0), &frag, {50.0, 0.0}).assemble(s);
  const double y = g.pivot(j);
  EXPECT_NEAR(weighted(g, b.birth_frag, 0.0), 2.0 * y, 1e-10 * y);  // S(y) = y, two fragments
  EXPECT_NEAR(weighted(g, b.birth_frag, 1.0), y * y, 1e-12 * y * y);
  EXPECT_DOUBLE_EQ(b.death_frag[j], y);
  for (std::size_t k = j + 1; k < g.size(); ++k) EXPECT_EQ(b.birth_frag[k], 0.0);
}

TEST(Assemble, FragmentCountMatchesModel) {
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    const auto frag = power_law_fragmentation(alpha, 0.5);
    const Grid g(1e-6, 100.0, 160);
    const SectionalOperator op(g, kernels::constant(0.0), &frag, {100.0, 0.0});
    for (std::size_t j = 80; j < g.size(); j += 13) {
      const auto row = op.fragment_weights(j);
      double count = 0.0, mass = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        count += row[k];
        mass += row[k] * g.pivot(k);
        ASSERT_GE(row[k], 0.0);
      }
      EXPECT_NEAR(count, frag.fragment_count(), 1e-10 * frag.fragment_count()) << "alpha " << alpha << " j " << j;
      EXPECT_NEAR(mass, g.pivot(j), 1e-12 * g.pivot(j));
    }
  }
}

TEST(Assemble, CoagulationDoesNotRaiseNegativeMoments) {
  const double sigma = 1.0 / 3.0;
  const Grid g(1.0 / 300.0, 100.0, 96);
  const SectionalOperator op(g, kernels::smoluchowski(), nullptr, {100.0, sigma});
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const auto b = op.assemble(random_state(g.size(), seed));
    for (double a : {0.0, 2.0 * sigma}) {
      std::vector<double> coag(b.birth_coag.size());
      for (std::size_t i = 0; i < coag.size(); ++i) coag[i] = b.birth_coag[i] - b.death_coag[i];
      EXPECT_LE(weighted(g, coag, -a), 0.0) << "alpha " << a;
    }
  }
}

TEST(Assemble, NonFiniteStateIsNumericError) {
  const Grid g(1e-2, 10.0, 10);
  State s(g.size());
  s.N[3] = std::numeric_limits<double>::infinity();
  const SectionalOperator op(g, kernels::constant(), nullptr, {10.0, 0.0});
  EXPECT_THROW(op.assemble(s), NumericError);
}
