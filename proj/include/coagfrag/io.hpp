#pragma once

// Output formats: per-snapshot CSV time series, JSON snapshots (lossless,
// reloadable), diagnostics/convergence JSON and the RHS breakdown dump.

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "coagfrag/convergence.hpp"
#include "coagfrag/diagnostics.hpp"
#include "coagfrag/discretization.hpp"
#include "coagfrag/integrator.hpp"

namespace coagfrag::io {

/// Shortest representation that round-trips.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return {buf.data(), res.ptr};
}

inline constexpr const char* kTimeseriesHeader =
    "t,M0,M1,M_neg2sigma,Ynorm,L_envelope,tail_R,tail_value,modulus_pair,modulus_measured,modulus_bound";

inline void write_timeseries_csv(std::ostream& os, const DiagnosticsReport& rep) {
  os << kTimeseriesHeader << '\n';
  for (const SnapshotDiagnostics& s : rep.snapshots) {
    os << format_double(s.t) << ',' << format_double(s.M0) << ',' << format_double(s.M1) << ','
       << format_double(s.M_neg2sigma) << ',' << format_double(s.y_norm) << ',' << format_double(rep.L) << ','
       << format_double(rep.tail_R) << ',' << format_double(s.tail_value) << ',' << format_double(s.modulus.t0)
       << ':' << format_double(s.modulus.t1) << ',' << format_double(s.modulus.measured) << ','
       << format_double(s.modulus.bound) << '\n';
  }
}

inline nlohmann::json grid_to_json(const Grid& g) {
  return {{"edges", std::vector<double>(g.edges().begin(), g.edges().end())},
          {"pivots", std::vector<double>(g.pivots().begin(), g.pivots().end())}};
}

inline nlohmann::json snapshots_to_json(const Trajectory& traj) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const State& s : traj.snapshots) snaps.push_back({{"t", s.t}, {"N", s.N}});
  return {{"grid", grid_to_json(traj.grid)},
          {"completed", traj.completed},
          {"failure", traj.failure},
          {"snapshots", std::move(snaps)}};
}

struct LoadedSnapshots {
  std::vector<double> edges;
  std::vector<double> pivots;
  std::vector<State> snapshots;
};

inline LoadedSnapshots snapshots_from_json(const nlohmann::json& j) {
  LoadedSnapshots out;
  out.edges = j.at("grid").at("edges").get<std::vector<double>>();
  out.pivots = j.at("grid").at("pivots").get<std::vector<double>>();
  for (const auto& s : j.at("snapshots")) {
    out.snapshots.emplace_back(s.at("t").get<double>(), s.at("N").get<std::vector<double>>());
  }
  return out;
}

inline nlohmann::json modulus_to_json(const ModulusCheck& m) {
  return {{"t0", m.t0}, {"t1", m.t1}, {"measured", m.measured}, {"bound", m.bound}, {"pass", m.pass()}};
}

inline nlohmann::json diagnostics_to_json(const DiagnosticsReport& rep, const Trajectory& traj) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const SnapshotDiagnostics& s : rep.snapshots) {
    snaps.push_back({{"t", s.t},
                     {"M0", s.M0},
                     {"M1", s.M1},
                     {"M_neg2sigma", s.M_neg2sigma},
                     {"Ynorm", s.y_norm},
                     {"envelope_moment", s.envelope_moment},
                     {"envelope_pass", s.envelope_pass},
                     {"tail_value", s.tail_value},
                     {"tail_pass", s.tail_pass},
                     {"f_delta", s.f_delta},
                     {"f_log_bound", s.f_log_bound},
                     {"ui_pass", s.ui_pass},
                     {"modulus", modulus_to_json(s.modulus)}});
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& m : rep.modulus_checks) pairs.push_back(modulus_to_json(m));
  return {{"y0", rep.y0},
          {"L_envelope", rep.L},
          {"L_proof_constant", rep.L_proof},
          {"tail_R", rep.tail_R},
          {"kappa_window", rep.kappa_window},
          {"snapshots", std::move(snaps)},
          {"modulus_pairs", std::move(pairs)},
          {"uniqueness_distances", rep.uniqueness_distances},
          {"run",
           {{"completed", traj.completed},
            {"failure", traj.failure},
            {"accepted_steps", traj.accepted_steps},
            {"rejected_steps", traj.rejected_steps},
            {"clamped_mass", traj.clamped_mass},
            {"estimated_error", traj.estimated_error}}},
          {"pass",
           {{"envelope", rep.envelope_ok()},
            {"tail", rep.tail_ok()},
            {"uniform_integrability", rep.uniform_integrability_ok()},
            {"modulus", rep.modulus_ok()},
            {"all", rep.all_pass()}}}};
}

inline nlohmann::json rhs_to_json(const RhsBreakdown& b, const Grid& g, double t) {
  return {{"t", t},
          {"pivots", std::vector<double>(g.pivots().begin(), g.pivots().end())},
          {"birth_coag", b.birth_coag},
          {"death_coag", b.death_coag},
          {"birth_frag", b.birth_frag},
          {"death_frag", b.death_frag}};
}

inline nlohmann::json convergence_to_json(const ConvergenceReport& rep) {
  return {{"ns", rep.ns},
          {"times", rep.times},
          {"window_cells", rep.window_cells},
          {"distances", rep.distances},
          {"relative", rep.relative},
          {"run_ok", rep.run_ok},
          {"failures", rep.failures}};
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "t,n,n_next,l1_distance,relative\n";
  for (std::size_t ti = 0; ti < rep.times.size(); ++ti) {
    for (std::size_t k = 0; k < rep.distances[ti].size(); ++k) {
      os << format_double(rep.times[ti]) << ',' << format_double(rep.ns[k]) << ',' << format_double(rep.ns[k + 1])
         << ',' << format_double(rep.distances[ti][k]) << ',' << format_double(rep.relative[ti][k]) << '\n';
    }
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace coagfrag::io
