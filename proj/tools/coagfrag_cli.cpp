// Command-line driver: run | verify-kernel | converge | oracle-test.
//
// Exit codes: 0 all asserted bounds pass, 1 bound violation, 2 configuration
// error, 3 numeric failure.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "coagfrag/coagfrag.hpp"

namespace fs = std::filesystem;
using namespace coagfrag;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

void init_logging() {
  const char* level = std::getenv("SOLVER_LOG");
  spdlog::set_level(level != nullptr ? spdlog::level::from_str(level) : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return config_from_toml(toml::table{});
  return parse_config(path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError({"output.dir: cannot create '" + dir.string() + "'"});
}

int cmd_run(const RunConfig& cfg, const fs::path& out, bool dump_rhs) {
  ensure_dir(out);
  for (const auto& w : cfg.warnings) spdlog::warn("{}", w);
  const Scenario sc = cfg.make_scenario();
  const SectionalOperator op(sc.make_grid(), sc.kernel, sc.fragmentation_ptr(), sc.truncation);
  spdlog::info("grid: {} cells on [{}, {}], kernel {}, n = {}", op.grid().size(), op.grid().x_min(),
               op.grid().x_max(), sc.kernel.name(), sc.truncation.n);

  if (dump_rhs) {
    State init = truncate_initial(sc.initial, sc.truncation.n, op.grid());
    io::write_text(out / "rhs.json", io::rhs_to_json(op.assemble(init), op.grid(), 0.0).dump(2));
  }

  const Trajectory traj = run(sc, op);
  io::write_text(out / "snapshots.json", io::snapshots_to_json(traj).dump(1));
  if (!traj.completed) {
    spdlog::error("integration aborted: {}", traj.failure);
    return kNumericError;
  }
  spdlog::info("{} accepted / {} rejected steps", traj.accepted_steps, traj.rejected_steps);

  const DiagnosticsReport rep = diagnose(traj, cfg.make_diagnostics_params());
  std::ostringstream csv;
  io::write_timeseries_csv(csv, rep);
  io::write_text(out / "timeseries.csv", csv.str());
  io::write_text(out / "diagnostics.json", io::diagnostics_to_json(rep, traj).dump(2));

  const double m1_0 = rep.snapshots.front().M1;
  double drift = 0.0;
  for (const auto& s : rep.snapshots) drift = std::max(drift, std::abs(s.M1 - m1_0) / m1_0);
  const bool mass_ok = m1_0 == 0.0 || drift <= 1e-8;
  spdlog::info("mass drift {:.3e}, envelope {}, tail {}, modulus {}, uniform integrability {}", drift,
               rep.envelope_ok(), rep.tail_ok(), rep.modulus_ok(), rep.uniform_integrability_ok());
  return (rep.all_pass() && mass_ok) ? kPass : kViolation;
}

int cmd_verify_kernel(const RunConfig& cfg) {
  bool ok = true;
  const CoagulationKernel k = cfg.make_kernel();
  const std::vector<double> samples = log_space(1e-6, 1e6, 200);
  try {
    const auto violations = check_envelope(k, samples);
    std::size_t asym = 0;
    for (double x : samples) {
      for (double y : samples) {
        if (k(x, y) != k(y, x)) ++asym;
      }
    }
    std::cout << "kernel " << k.name() << " envelope (kappa=" << k.envelope().kappa
              << ", lambda=" << k.envelope().lambda << ", sigma=" << k.envelope().sigma << "): "
              << violations.size() << " violations, " << asym << " asymmetric pairs on 200x200 grid\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i) {
      std::cout << "  K(" << violations[i].x << ", " << violations[i].y << ") = " << violations[i].rate
                << " > " << violations[i].bound << "\n";
    }
    ok = ok && violations.empty() && asym == 0;
  } catch (const AdmissibilityError& e) {
    std::cout << "kernel " << k.name() << ": " << e.what() << "\n";
    ok = false;
  }

  if (auto model = cfg.make_fragmentation()) {
    const std::vector<double> ys = log_space(1e-2, 1e3, 6);
    const BreakageReport br = validate_breakage(*model, ys);
    if (br.diverged) {
      std::cout << "breakage: " << br.message << "\n";
      ok = false;
    } else {
      std::cout << "breakage: max mass error " << br.max_mass_error() << ", count " << br.counts.front()
                << " (N = " << model->fragment_count() << "), spread " << br.count_spread << "\n";
      ok = ok && br.max_mass_error() <= 1e-10 && br.count_spread <= 1e-10 * model->fragment_count();
    }
    const HypothesisReport h = check_h5_h6(*model, cfg.sigma(), ys, cfg.fragmentation->q);
    std::cout << "hypotheses: C = " << h.C << ", q = " << h.h6.q << ", tau1 = " << h.h6.tau1
              << ", tau2 = " << h.h6.tau2 << ", B1 = " << h.h6.B1 << ", B2 = " << h.h6.B2 << "\n";
    for (const auto& v : h.violations) std::cout << "  " << v << "\n";
    ok = ok && !h.h5_diverged && !h.h6_diverged;
  }
  return ok ? kPass : kViolation;
}

int cmd_converge(const RunConfig& cfg, std::vector<double> ns, const fs::path& out, unsigned threads) {
  ensure_dir(out);
  if (ns.empty()) ns = cfg.convergence.ns;
  const Scenario tmpl = cfg.make_scenario();
  ConvergenceReport rep;
  try {
    rep = run_truncation_sequence(tmpl, ns, cfg.convergence.cells_per_doubling, threads);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("convergence.ns: ") + e.what()});
  }
  io::write_text(out / "convergence.json", io::convergence_to_json(rep).dump(2));
  std::ostringstream csv;
  io::write_convergence_csv(csv, rep);
  io::write_text(out / "convergence.csv", csv.str());
  if (!rep.complete()) {
    for (std::size_t k = 0; k < rep.ns.size(); ++k) {
      if (!rep.run_ok[k]) spdlog::error("n = {}: {}", rep.ns[k], rep.failures[k]);
    }
    return kNumericError;
  }
  const std::size_t last = rep.times.size() - 1;
  const bool decreasing = rep.strictly_decreasing(last);
  const double final_gap = rep.relative[last].back();
  std::cout << "t = " << rep.times[last] << ": relative gaps";
  for (double d : rep.relative[last]) std::cout << ' ' << d;
  std::cout << (decreasing ? " (strictly decreasing)" : " (NOT decreasing)") << ", final " << final_gap
            << " vs threshold " << cfg.convergence.threshold << "\n";
  return (decreasing && final_gap <= cfg.convergence.threshold) ? kPass : kViolation;
}

int cmd_oracle_test() {
  bool ok = true;
  const auto xs = oracles::certification_sizes();
  const auto ts = oracles::certification_times();
  for (const auto& o : {oracles::scott_oracle(), oracles::linear_fragmentation_oracle()}) {
    const auto rep = oracles::certify_residual(o, xs, ts);
    const double worst = rep.max_relative();
    std::cout << o.name << ": max relative residual " << worst << " over " << rep.points.size() << " points\n";
    ok = ok && worst <= 1e-6;
  }
  return ok ? kPass : kViolation;
}

std::vector<double> parse_ns(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError({"--ns: '" + item + "' is not a number"});
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Coagulation-multifragmentation solver with truncation diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
  bool dump_rhs = false;
  std::string ns_text;

  auto* run_cmd = app.add_subcommand("run", "integrate a scenario and emit time series, snapshots and diagnostics");
  auto* verify_cmd = app.add_subcommand("verify-kernel", "certify kernel envelope and fragmentation identities");
  auto* conv_cmd = app.add_subcommand("converge", "truncation sequence with increasing cutoff n");
  auto* oracle_cmd = app.add_subcommand("oracle-test", "residual certification of the closed-form solutions");

  for (auto* sub : {run_cmd, verify_cmd, conv_cmd, oracle_cmd}) {
    sub->add_option("--config", config_path, "TOML configuration file");
    sub->add_option("--threads", threads, "maximum worker threads")->check(CLI::PositiveNumber);
  }
  run_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
  run_cmd->add_flag("--dump-rhs", dump_rhs, "write the RHS breakdown of the initial state to rhs.json");
  conv_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
  conv_cmd->add_option("--ns", ns_text, "comma-separated ascending cutoffs, e.g. 25,50,100,200");

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle_cmd->parsed()) return cmd_oracle_test();
    if ((run_cmd->parsed() || verify_cmd->parsed()) && config_path.empty()) {
      throw ConfigError({"--config is required"});
    }
    const RunConfig cfg = load_config(config_path);
    const fs::path out = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
    if (run_cmd->parsed()) return cmd_run(cfg, out, dump_rhs);
    if (verify_cmd->parsed()) return cmd_verify_kernel(cfg);
    if (conv_cmd->parsed()) return cmd_converge(cfg, parse_ns(ns_text), out, threads);
  } catch (const ConfigError& e) {
    for (const auto& err : e.errors()) spdlog::error("config: {}", err);
    return kConfigError;
  } catch (const NumericError& e) {
    spdlog::error("numeric failure: {}", e.what());
    return kNumericError;
  } catch (const IntegrationError& e) {
    spdlog::error("numeric failure: {}", e.what());
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    spdlog::error("invalid input: {}", e.what());
    return kConfigError;
  }
  return kPass;
}
