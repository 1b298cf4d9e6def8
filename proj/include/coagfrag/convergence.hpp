#pragma once

// Sequences of truncated problems with growing cutoff n, compared cell by
// cell on the window below the smallest cutoff; grid refinement studies; and
// the two-integrator uniqueness probe.

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "coagfrag/diagnostics.hpp"
#include "coagfrag/discretization.hpp"
#include "coagfrag/integrator.hpp"

namespace coagfrag {

namespace detail {

/// Evaluates jobs with at most `threads` running at once; results keep job order.
template <class R>
std::vector<R> run_bounded(std::vector<std::function<R()>> jobs, unsigned threads) {
  std::vector<R> out;
  out.reserve(jobs.size());
  const std::size_t width = std::max(1u, threads);
  for (std::size_t start = 0; start < jobs.size(); start += width) {
    std::vector<std::future<R>> batch;
    for (std::size_t k = start; k < std::min(jobs.size(), start + width); ++k) {
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, jobs[k]));
    }
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

}  // namespace detail

/// Grids for several cutoffs that share x_min and the cell ratio, so that
/// every grid extends the one for the smallest cutoff.
struct SharedGrids {
  double x_min = 0.0;
  double log_ratio = 0.0;
  std::size_t window_cells = 0;  ///< cells of the smallest grid
  std::vector<Grid> grids;
};

/// `cells_per_doubling` fixes the ratio 2^(1/m); each n / n_min must be an
/// integer power of it. x_min is the largest lattice point not above `floor`.
inline SharedGrids plan_shared_grids(std::span<const double> ns, std::size_t cells_per_doubling, double floor) {
  if (ns.empty()) throw std::invalid_argument("plan_shared_grids: no cutoffs");
  if (cells_per_doubling == 0) throw std::invalid_argument("plan_shared_grids: cells_per_doubling must be positive");
  SharedGrids out;
  out.log_ratio = std::log(2.0) / static_cast<double>(cells_per_doubling);
  const double n_min = ns.front();
  if (!(floor > 0.0 && floor < n_min)) throw std::invalid_argument("plan_shared_grids: floor must lie in (0, n_min)");
  const auto base = static_cast<std::size_t>(std::ceil(std::log(n_min / floor) / out.log_ratio - 1e-9));
  out.window_cells = std::max<std::size_t>(base, 2);
  out.x_min = n_min * std::exp(-static_cast<double>(out.window_cells) * out.log_ratio);
  for (double n : ns) {
    const double steps = std::log(n / n_min) / out.log_ratio;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-6 || rounded < 0.0) {
      throw std::invalid_argument("plan_shared_grids: cutoff " + std::to_string(n) +
                                  " is not on the shared geometric lattice");
    }
    out.grids.push_back(Grid::geometric(out.x_min, out.log_ratio, out.window_cells + static_cast<std::size_t>(rounded)));
  }
  return out;
}

struct ConvergenceReport {
  std::vector<double> ns;
  std::vector<double> times;
  std::size_t window_cells = 0;
  /// distances[t][k]: L1 distance between runs k and k+1 on the common window.
  std::vector<std::vector<double>> distances;
  /// Same, divided by M0 of run k+1 at that time.
  std::vector<std::vector<double>> relative;
  std::vector<bool> run_ok;
  std::vector<std::string> failures;
  std::vector<Trajectory> trajectories;

  /// Consecutive gaps strictly decrease at snapshot index `ti`.
  [[nodiscard]] bool strictly_decreasing(std::size_t ti) const {
    const auto& d = distances.at(ti);
    for (std::size_t k = 1; k < d.size(); ++k) {
      if (!(d[k] < d[k - 1])) return false;
    }
    return true;
  }
  [[nodiscard]] bool complete() const {
    return std::all_of(run_ok.begin(), run_ok.end(), [](bool b) { return b; });
  }
};

/// Runs the template scenario for each cutoff (sigma, kernel, data unchanged)
/// on shared grids and tabulates consecutive Cauchy gaps at each snapshot.
inline ConvergenceReport run_truncation_sequence(const Scenario& tmpl, std::vector<double> ns,
                                                 std::size_t cells_per_doubling = 8, unsigned threads = 1) {
  if (ns.size() < 3) throw std::invalid_argument("run_truncation_sequence: need at least 3 cutoffs");
  if (!std::is_sorted(ns.begin(), ns.end()) || std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
    throw std::invalid_argument("run_truncation_sequence: cutoffs must be strictly ascending");
  }
  const double sigma = tmpl.truncation.sigma;
  const double floor =
      tmpl.grid.x_min.value_or(TruncationParams(ns.back(), sigma).default_grid_floor());
  const SharedGrids plan = plan_shared_grids(ns, cells_per_doubling, floor);

  std::vector<std::function<Trajectory()>> jobs;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    jobs.push_back([&tmpl, &plan, n = ns[k], k, sigma]() {
      Scenario sc = tmpl;
      sc.truncation = TruncationParams(n, sigma);
      try {
        const SectionalOperator op(plan.grids[k], sc.kernel, sc.fragmentation_ptr(), sc.truncation);
        return run(sc, op);
      } catch (const std::exception& e) {
        Trajectory t;
        t.grid = plan.grids[k];
        t.completed = false;
        t.failure = e.what();
        return t;
      }
    });
  }

  ConvergenceReport rep;
  rep.ns = ns;
  rep.window_cells = plan.window_cells;
  rep.trajectories = detail::run_bounded<Trajectory>(std::move(jobs), threads);
  for (const Trajectory& t : rep.trajectories) {
    rep.run_ok.push_back(t.completed);
    rep.failures.push_back(t.failure);
  }
  if (!rep.complete()) return rep;

  for (const State& s : rep.trajectories.front().snapshots) rep.times.push_back(s.t);
  for (std::size_t ti = 0; ti < rep.times.size(); ++ti) {
    std::vector<double> d, r;
    for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
      const State& a = rep.trajectories[k].snapshots.at(ti);
      const State& b = rep.trajectories[k + 1].snapshots.at(ti);
      const double dist = l1_distance(a, b, plan.window_cells);
      const double m0 = number_moment(rep.trajectories[k + 1].grid, b);
      d.push_back(dist);
      r.push_back(m0 > 0.0 ? dist / m0 : dist);
    }
    rep.distances.push_back(std::move(d));
    rep.relative.push_back(std::move(r));
  }
  return rep;
}

/// Sums consecutive groups of `factor` fine cells onto the coarse grid.
inline State coarsen(const State& fine, std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) throw GridError("coarsen: cell count not divisible by factor");
  State out(fine.size() / factor, fine.t);
  for (std::size_t i = 0; i < fine.size(); ++i) out.N[i / factor] += fine.N[i];
  return out;
}

struct RefinementReport {
  std::vector<std::size_t> cells;
  /// distances[k]: L1 distance at the horizon between cells[k] and cells[k+1]
  /// after summing the finer solution onto the coarser grid.
  std::vector<double> distances;
};

inline RefinementReport grid_refinement_study(const Scenario& tmpl, std::size_t base_cells, std::size_t doublings) {
  RefinementReport rep;
  std::vector<State> finals;
  for (std::size_t d = 0; d <= doublings; ++d) {
    Scenario sc = tmpl;
    sc.grid.cells = base_cells << d;
    const Trajectory t = run(sc);
    if (!t.completed) throw NumericError("grid_refinement_study: run failed: " + t.failure);
    rep.cells.push_back(sc.grid.cells);
    finals.push_back(t.final_state());
  }
  for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
    rep.distances.push_back(l1_distance(finals[k], coarsen(finals[k + 1], 2)));
  }
  return rep;
}

struct UniquenessProbe {
  double sup_distance = 0.0;
  std::vector<double> distances;  ///< per snapshot
  std::vector<std::string> warnings;
  double tolerance = 0.0;
  [[nodiscard]] bool pass() const noexcept { return sup_distance <= tolerance; }
};

/// Warnings when the kernel/selection fall outside the class where the
/// uniqueness distance is known to control differences:
/// lambda - sigma <= 1/2 and theta <= lambda - sigma.
inline std::vector<std::string> uniqueness_class_warnings(const Scenario& sc) {
  std::vector<std::string> w;
  const Envelope& env = sc.kernel.envelope();
  const double g = env.growth();
  if (g > 0.5) w.push_back("H3': lambda - sigma = " + std::to_string(g) + " exceeds 1/2");
  if (sc.fragmentation && sc.fragmentation->theta() > g) {
    w.push_back("H4': theta = " + std::to_string(sc.fragmentation->theta()) + " exceeds lambda - sigma");
  }
  return w;
}

/// sup over snapshots of the weighted distance between two runs of the same
/// scenario under different integrator settings.
inline UniquenessProbe uniqueness_probe(const Scenario& sc, const IntegratorOptions& first,
                                        const IntegratorOptions& second, double tolerance) {
  UniquenessProbe probe;
  probe.tolerance = tolerance;
  probe.warnings = uniqueness_class_warnings(sc);
  const SectionalOperator op(sc.make_grid(), sc.kernel, sc.fragmentation_ptr(), sc.truncation);
  Scenario a = sc;
  a.integrator = first;
  Scenario b = sc;
  b.integrator = second;
  const Trajectory ta = run(a, op);
  const Trajectory tb = run(b, op);
  if (!ta.completed || !tb.completed) {
    throw NumericError("uniqueness_probe: run failed: " + (ta.completed ? tb.failure : ta.failure));
  }
  const Envelope& env = sc.kernel.envelope();
  for (std::size_t i = 0; i < std::min(ta.snapshots.size(), tb.snapshots.size()); ++i) {
    const double d = weighted_distance(op.grid(), ta.snapshots[i], tb.snapshots[i], env.sigma, env.lambda);
    probe.distances.push_back(d);
    probe.sup_distance = std::max(probe.sup_distance, d);
  }
  return probe;
}

/// Fixed-step RK4 against adaptive RK4 at `rtol`.
inline UniquenessProbe uniqueness_probe(const Scenario& sc, double rtol, double dt_fixed, double tolerance) {
  IntegratorOptions fixed = sc.integrator;
  fixed.method = Method::RK4;
  fixed.adaptive = false;
  fixed.dt_fixed = dt_fixed;
  IntegratorOptions adaptive = sc.integrator;
  adaptive.method = Method::RK4;
  adaptive.adaptive = true;
  adaptive.rtol = rtol;
  return uniqueness_probe(sc, fixed, adaptive, tolerance);
}

}  // namespace coagfrag
