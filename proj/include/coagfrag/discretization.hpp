#pragma once

// Fixed-pivot sectional discretization of the truncated equation.
//
// Each coagulation event (i, j) creates one particle of size x_i + x_j, which
// is split between the two pivots bracketing it so that number and mass are
// both reproduced. Fragment distributions are integrated per receiving cell
// and each piece is split the same way around its mean size. Both event
// classes are therefore mass-exact up to rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coagfrag/grid.hpp"
#include "coagfrag/kernels.hpp"
#include "coagfrag/quadrature.hpp"
#include "coagfrag/summation.hpp"
#include "coagfrag/truncation.hpp"

namespace coagfrag {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RhsBreakdown {
  std::vector<double> birth_coag;
  std::vector<double> death_coag;
  std::vector<double> birth_frag;
  std::vector<double> death_frag;

  explicit RhsBreakdown(std::size_t cells = 0)
      : birth_coag(cells, 0.0), death_coag(cells, 0.0), birth_frag(cells, 0.0), death_frag(cells, 0.0) {}

  /// birth_coag - death_coag + birth_frag - death_frag
  [[nodiscard]] std::vector<double> total() const {
    std::vector<double> out(birth_coag.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (birth_coag[i] - death_coag[i]) + (birth_frag[i] - death_frag[i]);
    }
    return out;
  }
};

class SectionalOperator {
 public:
  /// `kernel` is the untruncated kernel; truncation is applied here with the
  /// grid's top pivot as the discrete size ceiling.
  SectionalOperator(Grid grid, const CoagulationKernel& kernel, const FragmentationModel* fragmentation,
                    const TruncationParams& truncation)
      : grid_(std::move(grid)), n_(truncation.n) {
    const std::size_t m = grid_.size();
    const double top = grid_.pivot(m - 1);
    const CoagulationKernel kn = truncate_kernel(kernel, truncation);

    for (std::size_t i = 0; i < m; ++i) {
      const double xi = grid_.pivot(i);
      for (std::size_t j = i; j < m; ++j) {
        const double xj = grid_.pivot(j);
        const double v = xi + xj;
        if (v > top) break;
        const double rate = kn(xi, xj);
        if (!std::isfinite(rate) || rate < 0.0) {
          throw NumericError("kernel rate at pivots (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") is not a finite non-negative number");
        }
        if (rate == 0.0) continue;
        std::size_t k = grid_.cell_of(v);
        if (grid_.pivot(k) > v) --k;  // v >= x_j >= x_0, so k stays valid
        double w_lo = 1.0;
        if (k + 1 < m && grid_.pivot(k) != v) {
          const double lo = grid_.pivot(k);
          const double hi = grid_.pivot(k + 1);
          w_lo = (hi - v) / (hi - lo);
        }
        pairs_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          static_cast<std::uint32_t>(k), rate, w_lo});
      }
    }

    if (fragmentation != nullptr) build_fragmentation(*fragmentation);
  }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] double cutoff() const noexcept { return n_; }
  [[nodiscard]] bool has_fragmentation() const noexcept { return !selection_.empty(); }

  /// Number weights of the fragments of one parent at pivot j, per cell.
  [[nodiscard]] std::vector<double> fragment_weights(std::size_t j) const {
    const std::size_t m = grid_.size();
    std::vector<double> row(m, 0.0);
    if (!has_fragmentation()) return row;
    for (std::size_t k = 0; k < m; ++k) row[k] = frag_[j * m + k];
    return row;
  }

  [[nodiscard]] RhsBreakdown assemble(const State& state) const {
    check_same_grid(grid_, state);
    const std::size_t m = grid_.size();
    RhsBreakdown out(m);
    const auto& N = state.N;

    for (const Pair& p : pairs_) {
      const double ni = N[p.i];
      const double nj = N[p.j];
      if (ni == 0.0 || nj == 0.0) continue;
      const double flux = p.rate * ni * nj;
      if (p.i == p.j) {
        out.death_coag[p.i] += flux;
        const double born = 0.5 * flux;
        out.birth_coag[p.k] += born * p.w_lo;
        if (p.w_lo != 1.0) out.birth_coag[p.k + 1] += born * (1.0 - p.w_lo);
      } else {
        out.death_coag[p.i] += flux;
        out.death_coag[p.j] += flux;
        out.birth_coag[p.k] += flux * p.w_lo;
        if (p.w_lo != 1.0) out.birth_coag[p.k + 1] += flux * (1.0 - p.w_lo);
      }
    }

    if (has_fragmentation()) {
      for (std::size_t j = 0; j < m; ++j) {
        const double out_rate = selection_[j] * N[j];
        if (out_rate == 0.0) continue;
        out.death_frag[j] = out_rate;
        const double* row = &frag_[j * m];
        for (std::size_t k = 0; k <= j; ++k) out.birth_frag[k] += out_rate * row[k];
      }
    }

    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(out.birth_coag[i]) || !std::isfinite(out.death_coag[i]) ||
          !std::isfinite(out.birth_frag[i]) || !std::isfinite(out.death_frag[i])) {
        throw NumericError("non-finite rate in cell " + std::to_string(i));
      }
    }
    return out;
  }

  /// Total right-hand side written into `out`.
  void rate(const State& state, std::vector<double>& out) const {
    const RhsBreakdown b = assemble(state);
    out.resize(b.birth_coag.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (b.birth_coag[i] - b.death_coag[i]) + (b.birth_frag[i] - b.death_frag[i]);
    }
  }

 private:
  struct Pair {
    std::uint32_t i;
    std::uint32_t j;
    std::uint32_t k;  ///< lower bracketing pivot of x_i + x_j
    double rate;
    double w_lo;  ///< share assigned to pivot k; the rest goes to k + 1
  };

  struct Piece {
    double number;
    double mass;
  };

  void build_fragmentation(const FragmentationModel& model) {
    const std::size_t m = grid_.size();
    selection_.assign(m, 0.0);
    frag_.assign(m * m, 0.0);
    const SelectionFn sn = truncate_selection([&model](double y) { return model.selection(y); }, n_);
    for (std::size_t j = 0; j < m; ++j) {
      const double y = grid_.pivot(j);
      const double s = sn(y);
      if (!std::isfinite(s) || s < 0.0) {
        throw NumericError("selection rate at pivot " + std::to_string(j) + " is not finite and non-negative");
      }
      selection_[j] = s;
      if (s == 0.0) continue;

      // pieces[0] is (0, e_0); pieces[k + 1] is cell k clipped to (0, y).
      std::vector<Piece> pieces(j + 2);
      pieces[0] = integrate_piece(model, 0.0, grid_.x_min(), y);
      for (std::size_t k = 0; k <= j; ++k) {
        pieces[k + 1] = integrate_piece(model, grid_.lower(k), k == j ? y : grid_.upper(k), y);
      }
      CompensatedSum mass_total;
      for (const Piece& pc : pieces) mass_total.add(pc.mass);
      const double scale = mass_total.value() > 0.0 ? y / mass_total.value() : 0.0;

      // Fragments below the floor are carried upward with the following
      // cells until their joint mean reaches the first pivot, so both number
      // and mass land on the grid.
      double* row = &frag_[j * m];
      Piece carry{pieces[0].number * scale, pieces[0].mass * scale};
      for (std::size_t k = 0; k <= j; ++k) {
        const Piece pc{pieces[k + 1].number * scale, pieces[k + 1].mass * scale};
        if (pc.number <= 0.0 || pc.mass <= 0.0) continue;
        Piece acc{carry.number + pc.number, carry.mass + pc.mass};
        if (acc.mass < acc.number * grid_.pivot(0)) {
          carry = acc;
          continue;
        }
        split(row, acc.number, acc.mass);
        carry = {0.0, 0.0};
      }
      // only a parent too close to the floor is left here; its mass is kept
      if (carry.mass > 0.0) row[0] += carry.mass / grid_.pivot(0);
    }
  }

  // Place (number, mass) on the two pivots around its mean size, which must
  // not lie below the first pivot.
  void split(double* row, double number, double mass) const {
    const double mean = mass / number;
    const auto pivots = grid_.pivots();
    std::size_t lo = static_cast<std::size_t>(std::upper_bound(pivots.begin(), pivots.end(), mean) - pivots.begin());
    lo = lo == 0 ? 0 : lo - 1;
    if (lo + 1 >= grid_.size() || pivots[lo] == mean) {
      row[lo] += number;
      return;
    }
    const double xl = pivots[lo];
    const double xh = pivots[lo + 1];
    const double w_hi = (mass - number * xl) / (xh - xl);
    row[lo] += number - w_hi;
    row[lo + 1] += w_hi;
  }

  static Piece integrate_piece(const FragmentationModel& model, double a, double b, double y) {
    if (!(b > a)) return {0.0, 0.0};
    if (const auto& pl = model.power_law()) {
      const double al = pl->alpha;
      const double c = al + 2.0;
      const double ra = a / y;
      const double rb = b / y;
      const double number = c / (al + 1.0) * (std::pow(rb, al + 1.0) - (ra > 0.0 ? std::pow(ra, al + 1.0) : 0.0));
      const double mass = y * (std::pow(rb, al + 2.0) - (ra > 0.0 ? std::pow(ra, al + 2.0) : 0.0));
      return {number, mass};
    }
    if (a == 0.0) {
      const double number = quadrature::integrate_from_zero([&](double x) { return model.breakage(x, y); }, b);
      const double mass = quadrature::integrate_from_zero([&](double x) { return x * model.breakage(x, y); }, b);
      return {number, mass};
    }
    const double number = quadrature::gauss8([&](double x) { return model.breakage(x, y); }, a, b);
    const double mass = quadrature::gauss8([&](double x) { return x * model.breakage(x, y); }, a, b);
    return {number, mass};
  }

  Grid grid_;
  double n_;
  std::vector<Pair> pairs_;
  std::vector<double> selection_;
  std::vector<double> frag_;  // row-major m x m, row = parent
};

/// One-shot assembly; prefer holding a SectionalOperator across time steps.
inline RhsBreakdown assemble_rhs(const State& state, const CoagulationKernel& kernel,
                                 const FragmentationModel* fragmentation, const TruncationParams& truncation,
                                 const Grid& grid) {
  return SectionalOperator(grid, kernel, fragmentation, truncation).assemble(state);
}

}  // namespace coagfrag
