#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "coagfrag/summation.hpp"

using coagfrag::CompensatedSum;
using coagfrag::compensated_sum;

TEST(CompensatedSum, RecoversCancelledTerms) {
  const std::vector<double> v{1e100, 1.0, -1e100};
  EXPECT_EQ(compensated_sum(v), 1.0);
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_EQ(naive, 0.0);  // the failure mode being guarded against
}

TEST(CompensatedSum, ManySmallTermsOnLargeBase) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1'000'000; ++i) s += 1e-16;
  EXPECT_NEAR(s.value(), 1.0 + 1e-10, 1e-22);
}

TEST(CompensatedSum, OrderInsensitiveOnRandomData) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-30.0, 30.0);
  std::vector<double> v(5000);
  for (double& x : v) x = std::exp(mag(rng)) * (rng() % 2 ? 1.0 : -1.0);
  const double ref = compensated_sum(v);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_NEAR(compensated_sum(v), ref, 1e-15 * std::abs(ref));
  }
}

TEST(CompensatedSum, EmptyIsZero) { EXPECT_EQ(compensated_sum({}), 0.0); }
