#pragma once

// Quadrature for integrals over (0, y] whose integrand behaves like a power
// x^a at the left endpoint: geometric panels toward zero, a composite
// Gauss-Legendre rule on each panel, and a geometric tail estimate once the
// panel contributions settle into a constant ratio.

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "coagfrag/summation.hpp"

namespace coagfrag {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace quadrature {

struct GradedRule {
  double rel_tol = 1e-10;
  /// Ratio between successive panel endpoints, in (0,1).
  double grading = 0.5;
  int max_panels = 1000;
};

template <class F>
double gauss8(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

template <class F>
double gauss10(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

/// Integral of f over (0, upper]. Throws IntegrationError when the panel
/// contributions stop decaying (integrand not integrable at 0) or when the
/// panel budget runs out before the tail estimate settles.
template <class F>
double integrate_from_zero(F&& f, double upper, const GradedRule& rule = {}) {
  if (!(upper > 0.0)) {
    if (upper == 0.0) return 0.0;
    throw std::invalid_argument("integrate_from_zero: upper limit must be non-negative");
  }
  CompensatedSum total;
  double hi = upper;
  double prev = 0.0;
  double prev_ratio = 0.0;
  int stable_ratio = 0;
  int growing = 0;
  int zero_panels = 0;
  for (int k = 0; k < rule.max_panels; ++k) {
    const double lo = hi * rule.grading;
    const double panel = gauss10(f, lo, hi);
    if (!std::isfinite(panel)) {
      throw IntegrationError("integrate_from_zero: non-finite panel contribution near x = " +
                             std::to_string(lo));
    }
    total.add(panel);
    hi = lo;

    if (panel == 0.0) {
      if (++zero_panels >= 8 && prev == 0.0) return total.value();
      prev = panel;
      continue;
    }
    zero_panels = 0;
    if (k == 0 || prev == 0.0) {
      prev = panel;
      continue;
    }

    const double ratio = panel / prev;
    prev = panel;
    if (ratio >= 1.0 - 1e-12) {
      if (++growing >= 8) {
        throw IntegrationError("integrate_from_zero: integrand is not integrable at 0 (panel ratio " +
                               std::to_string(ratio) + ")");
      }
      prev_ratio = ratio;
      continue;
    }
    growing = 0;

    if (ratio > 0.0 && std::abs(ratio - prev_ratio) <= 1e-6 * ratio) {
      ++stable_ratio;
    } else {
      stable_ratio = 0;
    }
    prev_ratio = ratio;

    const double sum = total.value();
    if (stable_ratio >= 2) {
      const double tail = panel * ratio / (1.0 - ratio);
      if (std::abs(tail) <= rule.rel_tol * std::abs(sum) || stable_ratio >= 4) {
        return sum + tail;
      }
    } else if (std::abs(ratio) < 0.9 &&
               std::abs(panel) / (1.0 - std::abs(ratio)) <= 1e-3 * rule.rel_tol * std::abs(sum)) {
      // decaying but not geometric (e.g. log x); the remaining tail is negligible
      return sum;
    }
  }
  throw IntegrationError("integrate_from_zero: panel budget exhausted before convergence");
}

}  // namespace quadrature
}  // namespace coagfrag
