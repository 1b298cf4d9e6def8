#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coagfrag/summation.hpp"

namespace coagfrag {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometric size grid: edges e_0 = x_min < ... < e_I = x_max with constant
/// ratio, pivots at the geometric cell midpoints.
class Grid {
 public:
  Grid() = default;

  Grid(double x_min, double x_max, std::size_t cells) {
    if (!(x_min > 0.0) || !(x_max > x_min) || !std::isfinite(x_max)) {
      throw GridError("build_grid: need 0 < x_min < x_max");
    }
    if (cells < 2) throw GridError("build_grid: need at least 2 cells");
    fill(x_min, std::log(x_max / x_min) / static_cast<double>(cells), cells);
    edges_.back() = x_max;
    finish();
  }

  /// Grid with edges x_min * exp(k * log_ratio), k = 0..cells. Grids built
  /// from the same (x_min, log_ratio) share their leading edges bit for bit.
  static Grid geometric(double x_min, double log_ratio, std::size_t cells) {
    if (!(x_min > 0.0) || !(log_ratio > 0.0)) throw GridError("geometric grid: need x_min > 0 and ratio > 1");
    if (cells < 2) throw GridError("build_grid: need at least 2 cells");
    Grid g;
    g.fill(x_min, log_ratio, cells);
    g.finish();
    return g;
  }

  [[nodiscard]] std::size_t size() const noexcept { return pivots_.size(); }
  [[nodiscard]] std::span<const double> pivots() const noexcept { return pivots_; }
  [[nodiscard]] std::span<const double> edges() const noexcept { return edges_; }
  [[nodiscard]] double pivot(std::size_t i) const { return pivots_[i]; }
  [[nodiscard]] double lower(std::size_t i) const { return edges_[i]; }
  [[nodiscard]] double upper(std::size_t i) const { return edges_[i + 1]; }
  [[nodiscard]] double width(std::size_t i) const { return edges_[i + 1] - edges_[i]; }
  [[nodiscard]] double ratio() const noexcept { return ratio_; }
  [[nodiscard]] double x_min() const { return edges_.front(); }
  [[nodiscard]] double x_max() const { return edges_.back(); }

  /// Index of the cell containing x, clamped to the grid.
  [[nodiscard]] std::size_t cell_of(double x) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    if (it == edges_.begin()) return 0;
    const auto k = static_cast<std::size_t>(it - edges_.begin()) - 1;
    return std::min(k, size() - 1);
  }

  bool operator==(const Grid&) const = default;

 private:
  void fill(double x_min, double log_step, std::size_t cells) {
    edges_.resize(cells + 1);
    const double log_lo = std::log(x_min);
    for (std::size_t k = 0; k <= cells; ++k) edges_[k] = std::exp(log_lo + log_step * static_cast<double>(k));
    edges_.front() = x_min;
    ratio_ = std::exp(log_step);
  }

  void finish() {
    if (!(ratio_ > 1.0)) throw GridError("build_grid: degenerate cell ratio");
    pivots_.resize(edges_.size() - 1);
    for (std::size_t i = 0; i < pivots_.size(); ++i) pivots_[i] = std::sqrt(edges_[i] * edges_[i + 1]);
  }

  std::vector<double> edges_;
  std::vector<double> pivots_;
  double ratio_ = 1.0;
};

inline Grid build_grid(double x_min, double x_max, std::size_t cells) { return {x_min, x_max, cells}; }

/// Number concentration per cell (N_i ~ integral of u over cell i) at time t.
struct State {
  double t = 0.0;
  std::vector<double> N;

  State() = default;
  explicit State(std::size_t cells, double time = 0.0) : t(time), N(cells, 0.0) {}
  State(double time, std::vector<double> values) : t(time), N(std::move(values)) {}

  [[nodiscard]] std::size_t size() const noexcept { return N.size(); }
  bool operator==(const State&) const = default;
};

inline void check_same_grid(const Grid& grid, const State& s) {
  if (s.size() != grid.size()) {
    throw GridError("state has " + std::to_string(s.size()) + " cells, grid has " + std::to_string(grid.size()));
  }
}

/// sum_i w(x_i) N_i, compensated.
template <class Weight>
double moment(const Grid& grid, const State& state, Weight&& weight) {
  check_same_grid(grid, state);
  CompensatedSum acc;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.N[i] != 0.0) acc.add(weight(grid.pivot(i)) * state.N[i]);
  }
  return acc.value();
}

inline double number_moment(const Grid& grid, const State& s) {
  return moment(grid, s, [](double) { return 1.0; });
}

inline double mass_moment(const Grid& grid, const State& s) {
  return moment(grid, s, [](double x) { return x; });
}

inline double power_moment(const Grid& grid, const State& s, double p) {
  return moment(grid, s, [p](double x) { return std::pow(x, p); });
}

/// L1 distance sum_i |a_i - b_i| over the first `cells` entries (all if 0).
inline double l1_distance(const State& a, const State& b, std::size_t cells = 0) {
  const std::size_t m = cells == 0 ? a.size() : cells;
  if (a.size() < m || b.size() < m) throw GridError("l1_distance: states shorter than window");
  CompensatedSum acc;
  for (std::size_t i = 0; i < m; ++i) acc.add(std::abs(a.N[i] - b.N[i]));
  return acc.value();
}

}  // namespace coagfrag
