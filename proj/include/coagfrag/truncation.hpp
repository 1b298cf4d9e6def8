#pragma once

// Cut-off problem on [0, n]: the kernel is switched off unless x + y <= n and
// both sizes are at least sigma/n; selection is switched off above n; the
// initial density is restricted to [0, n].

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "coagfrag/grid.hpp"
#include "coagfrag/kernels.hpp"

namespace coagfrag {

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TruncationParams {
  double n;
  double sigma;

  TruncationParams(double cutoff, double singularity) : n(cutoff), sigma(singularity) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("truncation: sigma must be >= 0");
    if (!(n > sigma) || !(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("truncation: need n > sigma (got n = " + std::to_string(n) + ")");
    }
  }

  [[nodiscard]] double lower_cutoff() const noexcept { return sigma / n; }

  /// Positive grid floor: min(sigma/n, 1e-4 n) for sigma > 0, else 1e-4 n.
  [[nodiscard]] double default_grid_floor() const noexcept {
    return sigma > 0.0 ? std::min(sigma / n, 1e-4 * n) : 1e-4 * n;
  }
};

[[nodiscard]] inline bool in_truncation_support(double x, double y, const TruncationParams& p) noexcept {
  const double lo = p.lower_cutoff();
  return x + y <= p.n && x >= lo && y >= lo;
}

inline CoagulationKernel truncate_kernel(const CoagulationKernel& kernel, const TruncationParams& p) {
  return {kernel.name() + "_n",
          [kernel, p](double x, double y) { return in_truncation_support(x, y, p) ? kernel(x, y) : 0.0; },
          kernel.envelope()};
}

inline SelectionFn truncate_selection(SelectionFn selection, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("truncate_selection: n must be positive");
  return [selection = std::move(selection), n](double x) { return x <= n ? selection(x) : 0.0; };
}

using DensityFn = std::function<double(double)>;

/// N_i = integral of u0 over cell i intersected with [0, n].
inline State truncate_initial(const DensityFn& u0, double n, const Grid& grid) {
  State s(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid.lower(i);
    const double b = std::min(grid.upper(i), n);
    if (!(b > a)) continue;
    for (double x : {a, 0.5 * (a + b), b}) {
      const double v = u0(x);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InputError("initial density is negative or non-finite at x = " + std::to_string(x));
      }
    }
    const double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double x) {
          const double v = u0(x);
          if (!(v >= 0.0)) throw InputError("initial density is negative at x = " + std::to_string(x));
          return v;
        },
        a, b, 8, 1e-12);
    s.N[i] = val;
  }
  return s;
}

}  // namespace coagfrag
