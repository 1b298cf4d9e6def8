#pragma once

// TOML run configuration: parsing, eager validation with every error
// collected, and construction of the scenario and diagnostics parameters.
//
//   kernel = "smoluchowski"                 # or [kernel] name/kappa/lambda/sigma/value
//   fragmentation = { family = "powerlaw", alpha = 0.5, gamma = 0.5 }   # or "none"
//   [truncation]  n, x_min_override
//   [grid]        cells, x_min
//   [initial]     amplitude, power, scale     # u0 = amplitude x^power exp(-x/scale)
//   [time]        horizon, snapshots, method, adaptive, rtol, dt_min, dt_initial, dt_fixed
//   [diagnostics] sigma, epsilon, R, delta, window, modulus_pairs
//   [convergence] ns, cells_per_doubling, threshold
//   [output]      dir

#include <toml.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coagfrag/diagnostics.hpp"
#include "coagfrag/integrator.hpp"
#include "coagfrag/kernels.hpp"

namespace coagfrag {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

  [[nodiscard]] const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out;
    for (const auto& e : errors) {
      if (!out.empty()) out += "\n";
      out += e;
    }
    return out;
  }
  std::vector<std::string> errors_;
};

struct KernelConfig {
  std::string name = "constant";
  double value = 1.0;  ///< constant kernel only
  Envelope envelope{1.0, 0.0, 0.0};
};

struct FragmentationConfig {
  std::string family = "powerlaw";
  double alpha = 0.0;
  double gamma = 1.0;
  double q = 1.5;
};

struct InitialConfig {
  double amplitude = 1.0;
  double power = 0.0;
  double scale = 1.0;

  [[nodiscard]] DensityFn density() const {
    return [a = amplitude, p = power, s = scale](double x) {
      return a * (p == 0.0 ? 1.0 : std::pow(x, p)) * std::exp(-x / s);
    };
  }
};

struct ConvergenceConfig {
  std::vector<double> ns{25.0, 50.0, 100.0, 200.0};
  std::size_t cells_per_doubling = 8;
  double threshold = 1e-3;
};

struct RunConfig {
  KernelConfig kernel;
  std::optional<FragmentationConfig> fragmentation;
  double n = 100.0;
  std::optional<double> x_min;
  std::size_t cells = 160;
  InitialConfig initial;
  double horizon = 1.0;
  std::vector<double> snapshots;
  IntegratorOptions integrator;
  std::optional<double> diag_sigma;
  double epsilon = 0.1;
  std::optional<double> tail_radius;
  double delta = 1e-2;
  double window = 1.0;
  std::vector<std::pair<double, double>> modulus_pairs;
  ConvergenceConfig convergence;
  std::string output_dir = "out";
  /// Hypothesis constants certified during validation (fragmentation only).
  std::optional<HypothesisReport> hypotheses;
  std::vector<std::string> warnings;

  [[nodiscard]] double sigma() const { return kernel.envelope.sigma; }

  [[nodiscard]] CoagulationKernel make_kernel() const {
    if (kernel.name == "constant") return kernels::constant(kernel.value);
    auto k = kernels::by_name(kernel.name);
    if (!k) throw ConfigError({"kernel: unknown kernel '" + kernel.name + "'"});
    return {k->name(), [k = *k](double x, double y) { return k(x, y); }, kernel.envelope};
  }

  [[nodiscard]] std::optional<FragmentationModel> make_fragmentation() const {
    if (!fragmentation) return std::nullopt;
    return power_law_fragmentation(fragmentation->alpha, fragmentation->gamma);
  }

  [[nodiscard]] Scenario make_scenario() const {
    Scenario sc;
    sc.kernel = make_kernel();
    sc.fragmentation = make_fragmentation();
    sc.truncation = TruncationParams(n, sigma());
    sc.grid.cells = cells;
    sc.grid.x_min = x_min;
    sc.initial = initial.density();
    sc.horizon = horizon;
    sc.snapshots = snapshots;
    sc.integrator = integrator;
    return sc;
  }

  [[nodiscard]] DiagnosticsParams make_diagnostics_params() const {
    DiagnosticsParams p;
    p.sigma = diag_sigma.value_or(sigma());
    p.lambda = kernel.envelope.lambda;
    p.horizon = horizon;
    p.epsilon = epsilon;
    p.tail_radius = tail_radius;
    p.delta = delta;
    p.window = window;
    p.modulus_pairs = modulus_pairs;
    if (fragmentation) {
      const FragmentationModel m = *make_fragmentation();
      p.fragment_count = m.fragment_count();
      if (hypotheses) {
        p.h5_constant = hypotheses->C;
        p.B1 = hypotheses->h6.B1;
        p.B2 = hypotheses->h6.B2;
        p.q = hypotheses->h6.q;
      }
    } else {
      p.fragment_count = 1.0;
      p.h5_constant = 0.0;
    }
    return p;
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const toml::table& root) : root_(root) {}

  std::vector<std::string> errors;

  template <class T>
  std::optional<T> get(std::string_view path) {
    const toml::node_view<const toml::node> node = root_.at_path(path);
    if (!node) return std::nullopt;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = node.value<double>()) return *v;
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      if (auto v = node.value<std::int64_t>()) return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node.value<bool>()) return *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node.value<std::string>()) return *v;
    }
    fail(path, "has the wrong type" + where(*node.node()));
    return std::nullopt;
  }

  std::optional<std::vector<double>> number_list(std::string_view path) {
    const auto node = root_.at_path(path);
    if (!node) return std::nullopt;
    const toml::array* arr = node.as_array();
    if (arr == nullptr) {
      fail(path, "must be an array of numbers" + where(*node.node()));
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& el : *arr) {
      auto v = el.value<double>();
      if (!v) {
        fail(path, "must contain only numbers" + where(el));
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

  void fail(std::string_view path, const std::string& what) { errors.push_back(std::string(path) + ": " + what); }

  static std::string where(const toml::node& n) {
    const auto& src = n.source();
    if (src.begin.line == 0) return "";
    return " (line " + std::to_string(src.begin.line) + ")";
  }

  [[nodiscard]] const toml::table& root() const { return root_; }

 private:
  const toml::table& root_;
};

inline constexpr std::array<std::string_view, 34> kKnownKeys{
    "convergence.cells_per_doubling", "convergence.ns", "convergence.threshold", "diagnostics.R",
    "diagnostics.delta", "diagnostics.epsilon", "diagnostics.modulus_pairs", "diagnostics.sigma",
    "diagnostics.window", "fragmentation.alpha", "fragmentation.family", "fragmentation.gamma",
    "fragmentation.q", "grid.cells", "grid.x_min", "initial.amplitude",
    "initial.power", "initial.scale", "kernel.kappa", "kernel.lambda",
    "kernel.name", "kernel.sigma", "kernel.value", "output.dir",
    "time.adaptive", "time.dt_fixed", "time.dt_initial", "time.dt_min",
    "time.horizon", "time.method", "time.rtol", "time.snapshots",
    "truncation.n", "truncation.x_min_override"};

// Reports keys that would otherwise be silently ignored (typos).
inline void check_unknown_keys(const toml::table& table, const std::string& prefix, ConfigReader& r) {
  for (const auto& [key, node] : table) {
    const std::string path = prefix.empty() ? std::string(key.str()) : prefix + "." + std::string(key.str());
    const bool known = std::find(kKnownKeys.begin(), kKnownKeys.end(), path) != kKnownKeys.end();
    if (known) continue;
    const bool section = std::any_of(kKnownKeys.begin(), kKnownKeys.end(), [&](std::string_view k) {
      return k.size() > path.size() && k.substr(0, path.size()) == path && k[path.size()] == '.';
    });
    if (section && node.is_table()) {
      check_unknown_keys(*node.as_table(), path, r);
    } else if (!section) {
      r.fail(path, "unknown key" + ConfigReader::where(node));
    }
  }
}

}  // namespace detail

/// Validates a parsed TOML document. Throws ConfigError listing every problem.
inline RunConfig config_from_toml(const toml::table& root) {
  detail::ConfigReader r(root);
  RunConfig cfg;
  detail::check_unknown_keys(root, "", r);

  // kernel
  if (const auto* node = root.get("kernel")) {
    if (auto name = node->value<std::string>()) {
      cfg.kernel.name = *name;
    } else if (node->is_table()) {
      if (auto name2 = r.get<std::string>("kernel.name")) {
        cfg.kernel.name = *name2;
      } else {
        r.fail("kernel.name", "is required");
      }
    } else {
      r.fail("kernel", "must be a kernel name or a table");
    }
  }
  if (auto k = kernels::by_name(cfg.kernel.name)) {
    cfg.kernel.envelope = k->envelope();
    if (cfg.kernel.name == "constant") {
      if (auto v = r.get<double>("kernel.value")) cfg.kernel.value = *v;
      if (!(cfg.kernel.value >= 0.0)) r.fail("kernel.value", "must be >= 0");
      cfg.kernel.envelope.kappa = cfg.kernel.value;
    }
    if (auto v = r.get<double>("kernel.kappa")) cfg.kernel.envelope.kappa = *v;
    if (auto v = r.get<double>("kernel.lambda")) cfg.kernel.envelope.lambda = *v;
    if (auto v = r.get<double>("kernel.sigma")) cfg.kernel.envelope.sigma = *v;
    try {
      check_admissible(cfg.kernel.envelope);
    } catch (const AdmissibilityError& e) {
      r.fail("kernel", e.what());
    }
  } else {
    r.fail("kernel", "unknown kernel '" + cfg.kernel.name + "' (expected smoluchowski, eke, constant or product)");
  }

  // fragmentation
  if (const auto* node = root.get("fragmentation")) {
    if (auto s = node->value<std::string>()) {
      if (*s != "none") r.fail("fragmentation", "must be \"none\" or a table with family = \"powerlaw\"");
    } else if (node->is_table()) {
      FragmentationConfig f;
      if (auto fam = r.get<std::string>("fragmentation.family")) f.family = *fam;
      if (f.family != "powerlaw") r.fail("fragmentation.family", "unsupported family '" + f.family + "'");
      if (auto v = r.get<double>("fragmentation.alpha")) f.alpha = *v; else r.fail("fragmentation.alpha", "is required");
      if (auto v = r.get<double>("fragmentation.gamma")) f.gamma = *v; else r.fail("fragmentation.gamma", "is required");
      if (auto v = r.get<double>("fragmentation.q")) f.q = *v;
      if (!(f.q > 1.0)) r.fail("fragmentation.q", "must exceed 1");
      cfg.fragmentation = f;
    } else {
      r.fail("fragmentation", "must be \"none\" or a table");
    }
  }

  // truncation / grid
  if (auto v = r.get<double>("truncation.n")) cfg.n = *v;
  if (!(cfg.n > 0.0) || !std::isfinite(cfg.n)) r.fail("truncation.n", "must be positive");
  else if (!(cfg.n > cfg.kernel.envelope.sigma)) r.fail("truncation.n", "must exceed sigma");
  if (auto v = r.get<double>("truncation.x_min_override")) cfg.x_min = *v;
  if (auto v = r.get<double>("grid.x_min")) cfg.x_min = *v;
  if (cfg.x_min && !(*cfg.x_min > 0.0 && *cfg.x_min < cfg.n)) r.fail("grid.x_min", "must lie in (0, truncation.n)");
  if (auto v = r.get<std::int64_t>("grid.cells")) {
    if (*v < 2) r.fail("grid.cells", "must be at least 2");
    else cfg.cells = static_cast<std::size_t>(*v);
  }

  // initial data
  if (auto v = r.get<double>("initial.amplitude")) cfg.initial.amplitude = *v;
  if (auto v = r.get<double>("initial.power")) cfg.initial.power = *v;
  if (auto v = r.get<double>("initial.scale")) cfg.initial.scale = *v;
  if (!(cfg.initial.amplitude >= 0.0)) r.fail("initial.amplitude", "must be >= 0");
  if (!(cfg.initial.scale > 0.0)) r.fail("initial.scale", "must be positive");
  if (!(cfg.initial.power > -1.0)) r.fail("initial.power", "must exceed -1");

  // time
  if (auto v = r.get<double>("time.horizon")) cfg.horizon = *v;
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) r.fail("time.horizon", "must be a finite value >= 0");
  if (auto v = r.number_list("time.snapshots")) cfg.snapshots = *v;
  for (std::size_t i = 0; i < cfg.snapshots.size(); ++i) {
    if (!(cfg.snapshots[i] >= 0.0 && cfg.snapshots[i] <= cfg.horizon)) {
      r.fail("time.snapshots", "entry " + std::to_string(cfg.snapshots[i]) + " is outside [0, time.horizon]");
    } else if (i > 0 && !(cfg.snapshots[i] > cfg.snapshots[i - 1])) {
      r.fail("time.snapshots", "must be strictly increasing");
    }
  }
  if (auto v = r.get<std::string>("time.method")) {
    if (*v == "rk4") cfg.integrator.method = Method::RK4;
    else if (*v == "euler") cfg.integrator.method = Method::Euler;
    else r.fail("time.method", "must be \"rk4\" or \"euler\"");
  }
  if (auto v = r.get<bool>("time.adaptive")) cfg.integrator.adaptive = *v;
  if (auto v = r.get<double>("time.rtol")) cfg.integrator.rtol = *v;
  if (auto v = r.get<double>("time.dt_min")) cfg.integrator.dt_min = *v;
  if (auto v = r.get<double>("time.dt_initial")) cfg.integrator.dt_initial = *v;
  if (auto v = r.get<double>("time.dt_fixed")) cfg.integrator.dt_fixed = *v;
  if (!(cfg.integrator.rtol > 0.0)) r.fail("time.rtol", "must be positive");
  if (!(cfg.integrator.dt_min > 0.0)) r.fail("time.dt_min", "must be positive");
  if (!(cfg.integrator.dt_initial > 0.0)) r.fail("time.dt_initial", "must be positive");
  if (!(cfg.integrator.dt_fixed > 0.0)) r.fail("time.dt_fixed", "must be positive");

  // diagnostics
  if (auto v = r.get<double>("diagnostics.sigma")) {
    cfg.diag_sigma = *v;
    if (!(*v >= 0.0)) r.fail("diagnostics.sigma", "must be >= 0");
  }
  if (auto v = r.get<double>("diagnostics.epsilon")) cfg.epsilon = *v;
  if (!(cfg.epsilon > 0.0)) r.fail("diagnostics.epsilon", "must be positive");
  if (auto v = r.get<double>("diagnostics.R")) {
    cfg.tail_radius = *v;
    if (!(*v > 1.0)) r.fail("diagnostics.R", "must exceed 1");
  }
  if (auto v = r.get<double>("diagnostics.delta")) cfg.delta = *v;
  if (!(cfg.delta > 0.0)) r.fail("diagnostics.delta", "must be positive");
  if (auto v = r.get<double>("diagnostics.window")) cfg.window = *v;
  if (!(cfg.window > 0.0)) r.fail("diagnostics.window", "must be positive");
  if (const auto node = root.at_path("diagnostics.modulus_pairs")) {
    const toml::array* arr = node.as_array();
    bool ok = arr != nullptr;
    if (ok) {
      for (const auto& el : *arr) {
        const toml::array* pr = el.as_array();
        if (pr == nullptr || pr->size() != 2 || !(*pr)[0].value<double>() || !(*pr)[1].value<double>()) {
          ok = false;
          break;
        }
        const double a = *(*pr)[0].value<double>();
        const double b = *(*pr)[1].value<double>();
        auto is_snapshot = [&](double t) {
          if (t == 0.0 || t == cfg.horizon) return true;
          return std::find(cfg.snapshots.begin(), cfg.snapshots.end(), t) != cfg.snapshots.end();
        };
        if (!is_snapshot(a) || !is_snapshot(b)) {
          r.fail("diagnostics.modulus_pairs", "pair times must be snapshot times, 0 or the horizon");
        }
        cfg.modulus_pairs.emplace_back(a, b);
      }
    }
    if (!ok) r.fail("diagnostics.modulus_pairs", "must be an array of [t, t'] number pairs");
  }

  // convergence
  if (auto v = r.number_list("convergence.ns")) cfg.convergence.ns = *v;
  if (auto v = r.get<std::int64_t>("convergence.cells_per_doubling")) {
    if (*v < 1) r.fail("convergence.cells_per_doubling", "must be positive");
    else cfg.convergence.cells_per_doubling = static_cast<std::size_t>(*v);
  }
  if (auto v = r.get<double>("convergence.threshold")) cfg.convergence.threshold = *v;

  if (auto v = r.get<std::string>("output.dir")) cfg.output_dir = *v;

  // Fragmentation hypotheses need a valid sigma and model, so they run last.
  if (cfg.fragmentation && r.errors.empty()) {
    const FragmentationConfig& f = *cfg.fragmentation;
    std::optional<FragmentationModel> model;
    try {
      model = power_law_fragmentation(f.alpha, f.gamma);
    } catch (const ModelError& e) {
      r.fail("fragmentation", std::string(e.what()) + "; H5/H6 cannot hold");
    }
    if (model) {
      const double sigma = cfg.sigma();
      if (sigma > 0.5) {
        r.fail("fragmentation", "H5 requires sigma <= 1/2 (kernel sigma = " + std::to_string(sigma) + ")");
      } else {
        const std::vector<double> ys = log_space(1e-3, 1e3, 13);
        HypothesisReport h = check_h5_h6(*model, sigma, ys, f.q);
        if (h.h5_diverged || h.h6_diverged) {
          for (const auto& v : h.violations) r.fail("fragmentation", v);
        } else {
          for (const auto& v : h.violations) cfg.warnings.push_back(v);
        }
        cfg.hypotheses = h;
      }
    }
  }

  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return cfg;
}

inline RunConfig parse_config_string(std::string_view text, std::string_view source = "config") {
  try {
    const toml::table root = toml::parse(text, source);
    return config_from_toml(root);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "parse error at line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
        << e.description();
    throw ConfigError({msg.str()});
  }
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  try {
    const toml::table root = toml::parse_file(path.string());
    return config_from_toml(root);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path.string() << ": parse error at line " << e.source().begin.line << ", column "
        << e.source().begin.column << ": " << e.description();
    throw ConfigError({msg.str()});
  }
}

}  // namespace coagfrag
