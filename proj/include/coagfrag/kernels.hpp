#pragma once

// Coagulation kernels with their growth/singularity envelopes, and
// fragmentation models built from a multifragmentation kernel Gamma.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coagfrag/quadrature.hpp"

namespace coagfrag {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class AdmissibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Certificate K(x,y) <= kappa (1+x)^lambda (1+y)^lambda (xy)^-sigma.
struct Envelope {
  double kappa = 1.0;
  double lambda = 0.0;
  double sigma = 0.0;

  [[nodiscard]] double growth() const noexcept { return lambda - sigma; }

  [[nodiscard]] double bound(double x, double y) const {
    return kappa * std::pow(1.0 + x, lambda) * std::pow(1.0 + y, lambda) * std::pow(x * y, -sigma);
  }
};

inline void check_admissible(const Envelope& env) {
  if (!(env.sigma >= 0.0)) throw AdmissibilityError("envelope: sigma must be >= 0");
  if (!(env.kappa >= 0.0)) throw AdmissibilityError("envelope: kappa must be >= 0");
  const double g = env.growth();
  if (!(g >= 0.0 && g < 1.0)) {
    throw AdmissibilityError("envelope: lambda - sigma = " + std::to_string(g) + " is outside [0, 1)");
  }
}

class CoagulationKernel {
 public:
  using Rate = std::function<double(double, double)>;

  CoagulationKernel(std::string name, Rate rate, Envelope envelope)
      : name_(std::move(name)), rate_(std::move(rate)), envelope_(envelope) {
    if (!rate_) throw std::invalid_argument("CoagulationKernel: empty rate function");
  }

  /// Rate at (x, y); both sizes must be positive.
  double operator()(double x, double y) const {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw DomainError("kernel '" + name_ + "': sizes must be positive");
    }
    return rate_(x, y);
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const Envelope& envelope() const noexcept { return envelope_; }

 private:
  std::string name_;
  Rate rate_;
  Envelope envelope_;
};

inline double eval_kernel(const CoagulationKernel& k, double x, double y) { return k(x, y); }

namespace kernels {

/// Brownian kernel (x^1/3 + y^1/3)(x^-1/3 + y^-1/3).
inline CoagulationKernel smoluchowski() {
  return {"smoluchowski",
          [](double x, double y) {
            const double cx = std::cbrt(x);
            const double cy = std::cbrt(y);
            return (cx + cy) * (1.0 / cx + 1.0 / cy);
          },
          Envelope{4.0, 2.0 / 3.0, 1.0 / 3.0}};
}

/// Equipartition-of-kinetic-energy kernel (x^1/3 + y^1/3)^2 sqrt(1/x + 1/y).
inline CoagulationKernel eke() {
  return {"eke",
          [](double x, double y) {
            const double s = std::cbrt(x) + std::cbrt(y);
            return s * s * std::sqrt(1.0 / x + 1.0 / y);
          },
          Envelope{8.0, 7.0 / 6.0, 0.5}};
}

inline CoagulationKernel constant(double value = 1.0) {
  if (!(value >= 0.0)) throw std::invalid_argument("constant kernel: value must be >= 0");
  return {"constant", [value](double, double) { return value; }, Envelope{value, 0.0, 0.0}};
}

/// x*y. Its envelope has lambda - sigma = 1 and fails admissibility (gelling regime).
inline CoagulationKernel product() {
  return {"product", [](double x, double y) { return x * y; }, Envelope{1.0, 1.0, 0.0}};
}

inline std::optional<CoagulationKernel> by_name(const std::string& name) {
  if (name == "smoluchowski") return smoluchowski();
  if (name == "eke") return eke();
  if (name == "constant") return constant();
  if (name == "product") return product();
  return std::nullopt;
}

}  // namespace kernels

inline std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw std::invalid_argument("log_space: bad range");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

struct EnvelopeViolation {
  double x;
  double y;
  double rate;
  double bound;
};

/// Every pair (x, y) from samples x samples where the kernel exceeds its
/// envelope by more than `rel_tol` relative. Throws AdmissibilityError when
/// the certificate itself is outside the admissible class.
inline std::vector<EnvelopeViolation> check_envelope(const CoagulationKernel& kernel,
                                                     std::span<const double> samples,
                                                     double rel_tol = 1e-12) {
  const Envelope& env = kernel.envelope();
  check_admissible(env);
  std::vector<EnvelopeViolation> out;
  for (double x : samples) {
    for (double y : samples) {
      const double rate = kernel(x, y);
      const double bound = env.bound(x, y);
      if (!std::isfinite(rate) || rate < 0.0 || rate > bound * (1.0 + rel_tol)) {
        out.push_back({x, y, rate, bound});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fragmentation

/// Gamma(parent y, fragment x), defined for 0 < x < y.
using GammaFn = std::function<double(double, double)>;
using SelectionFn = std::function<double(double)>;
/// b(fragment x, parent y).
using BreakageFn = std::function<double(double, double)>;

/// S(y) = int_0^y (x/y) Gamma(y, x) dx.
inline double derive_selection(const GammaFn& gamma, double y, const quadrature::GradedRule& rule = {}) {
  if (!(y > 0.0)) throw DomainError("derive_selection: y must be positive");
  const double s = quadrature::integrate_from_zero([&](double x) { return (x / y) * gamma(y, x); }, y, rule);
  return std::max(s, 0.0);
}

/// b(x, y) = Gamma(y, x) / S(y), zero for x > y.
inline BreakageFn derive_breakage(GammaFn gamma, SelectionFn selection) {
  return [gamma = std::move(gamma), selection = std::move(selection)](double x, double y) {
    if (x > y) return 0.0;
    const double g = gamma(y, x);
    if (g == 0.0) return 0.0;
    const double s = selection(y);
    if (!(s > 0.0)) {
      throw ModelError("derive_breakage: S(" + std::to_string(y) + ") = 0 while Gamma is nonzero");
    }
    return g / s;
  };
}

struct PowerLawParams {
  double alpha;
  double gamma;
};

class FragmentationModel {
 public:
  FragmentationModel(std::string name, GammaFn gamma, SelectionFn selection, BreakageFn breakage,
                     double fragment_count, double theta,
                     std::optional<PowerLawParams> power_law = std::nullopt)
      : name_(std::move(name)),
        gamma_(std::move(gamma)),
        selection_(std::move(selection)),
        breakage_(std::move(breakage)),
        fragment_count_(fragment_count),
        theta_(theta),
        power_law_(power_law) {
    if (!(fragment_count_ >= 1.0) || !std::isfinite(fragment_count_)) {
      throw ModelError("fragmentation '" + name_ + "': fragment count must be finite and >= 1");
    }
    if (!(theta_ >= 0.0)) throw ModelError("fragmentation '" + name_ + "': theta must be >= 0");
  }

  /// Model from Gamma alone: S and b are derived by quadrature and N is
  /// measured at y = 1.
  static FragmentationModel from_gamma(std::string name, GammaFn gamma, double theta,
                                       const quadrature::GradedRule& rule = {}) {
    SelectionFn selection = [gamma, rule](double y) { return derive_selection(gamma, y, rule); };
    BreakageFn breakage = derive_breakage(gamma, selection);
    const double count = quadrature::integrate_from_zero([&](double x) { return breakage(x, 1.0); }, 1.0, rule);
    return {std::move(name), std::move(gamma), std::move(selection), std::move(breakage), count, theta};
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] double gamma(double y, double x) const { return gamma_(y, x); }
  [[nodiscard]] double selection(double y) const { return selection_(y); }
  [[nodiscard]] double breakage(double x, double y) const { return x > y ? 0.0 : breakage_(x, y); }
  [[nodiscard]] double fragment_count() const noexcept { return fragment_count_; }
  [[nodiscard]] double theta() const noexcept { return theta_; }
  [[nodiscard]] const std::optional<PowerLawParams>& power_law() const noexcept { return power_law_; }

 private:
  std::string name_;
  GammaFn gamma_;
  SelectionFn selection_;
  BreakageFn breakage_;
  double fragment_count_;
  double theta_;
  std::optional<PowerLawParams> power_law_;
};

/// Gamma(y, x) = (alpha+2) x^alpha y^(gamma-(alpha+1)), giving S(y) = y^gamma,
/// b(x, y) = (alpha+2) x^alpha y^-(alpha+1) and N = (alpha+2)/(alpha+1).
inline FragmentationModel power_law_fragmentation(double alpha, double gamma) {
  if (!(alpha > -1.0)) {
    throw ModelError("power-law fragmentation: alpha = " + std::to_string(alpha) +
                     " <= -1 makes the fragment count integral diverge");
  }
  if (!(gamma > 0.0) || !(gamma < alpha + 2.0)) {
    throw ModelError("power-law fragmentation: gamma must lie in (0, alpha + 2)");
  }
  const double c = alpha + 2.0;
  GammaFn g = [alpha, gamma, c](double y, double x) {
    if (x > y) return 0.0;
    return c * std::pow(x, alpha) * std::pow(y, gamma - (alpha + 1.0));
  };
  SelectionFn s = [gamma](double y) { return std::pow(y, gamma); };
  BreakageFn b = [alpha, c](double x, double y) {
    if (x > y) return 0.0;
    return c * std::pow(x, alpha) * std::pow(y, -(alpha + 1.0));
  };
  return {"powerlaw", std::move(g), std::move(s), std::move(b), c / (alpha + 1.0), gamma,
          PowerLawParams{alpha, gamma}};
}

struct BreakageReport {
  std::vector<double> ys;
  std::vector<double> mass_rel_error;  ///< |int x b dx - y| / y
  std::vector<double> counts;          ///< int b dx
  double count_spread = 0.0;           ///< max count - min count
  bool diverged = false;
  std::string message;

  [[nodiscard]] double max_mass_error() const {
    return mass_rel_error.empty() ? 0.0 : *std::max_element(mass_rel_error.begin(), mass_rel_error.end());
  }
};

/// Mass identity int_0^y x b dx = y and the count int_0^y b dx = N on each
/// sampled parent size.
inline BreakageReport validate_breakage(const FragmentationModel& model, std::span<const double> ys,
                                        const quadrature::GradedRule& rule = {}) {
  BreakageReport report;
  for (double y : ys) {
    if (!(y > 0.0)) throw DomainError("validate_breakage: parent sizes must be positive");
  }
  report.ys.assign(ys.begin(), ys.end());
  try {
    for (double y : ys) {
      const double mass = quadrature::integrate_from_zero([&](double x) { return x * model.breakage(x, y); }, y, rule);
      const double count = quadrature::integrate_from_zero([&](double x) { return model.breakage(x, y); }, y, rule);
      report.mass_rel_error.push_back(std::abs(mass - y) / y);
      report.counts.push_back(count);
    }
  } catch (const IntegrationError& e) {
    report.diverged = true;
    report.message = std::string("breakage validation failed: ") + e.what();
    return report;
  }
  if (!report.counts.empty()) {
    const auto [lo, hi] = std::minmax_element(report.counts.begin(), report.counts.end());
    report.count_spread = *hi - *lo;
  }
  return report;
}

struct H6Params {
  double q = 1.5;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double B1 = 0.0;
  double B2 = 0.0;
};

struct HypothesisReport {
  double sigma = 0.0;
  double theta = 0.0;
  double C = 0.0;  ///< smallest constant with int b x^-2sigma dx <= C y^-2sigma on samples
  H6Params h6;
  bool h5_diverged = false;
  bool h6_diverged = false;
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

namespace detail {

// Least-squares slope of log(values) against log(ys).
inline double log_log_slope(std::span<const double> ys, std::span<const double> values) {
  const std::size_t m = ys.size();
  if (m < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(ys[i]);
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = static_cast<double>(m) * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (static_cast<double>(m) * sxy - sx * sy) / den;
}

}  // namespace detail

/// Sample-based certification of the selection growth bound S(y) <= y^theta,
/// the weighted count bound, and the two L^q bounds on b. Divergent integrals
/// are reported as violations.
inline HypothesisReport check_h5_h6(const FragmentationModel& model, double sigma, std::span<const double> ys,
                                    double q = 1.5, const quadrature::GradedRule& rule = {}) {
  if (!(sigma >= 0.0 && sigma <= 0.5)) throw std::invalid_argument("check_h5_h6: sigma must lie in [0, 1/2]");
  if (!(q > 1.0)) throw std::invalid_argument("check_h5_h6: q must exceed 1");
  HypothesisReport rep;
  rep.sigma = sigma;
  rep.theta = model.theta();
  rep.h6.q = q;
  const double theta = model.theta();

  if (!(theta < 1.0)) {
    rep.violations.push_back("H4: theta = " + std::to_string(theta) + " is not below 1");
  }
  for (double y : ys) {
    const double s = model.selection(y);
    if (s > std::pow(y, theta) * (1.0 + 1e-12)) {
      rep.violations.push_back("H4: S(" + std::to_string(y) + ") exceeds y^theta");
      break;
    }
  }

  try {
    double c = 0.0;
    for (double y : ys) {
      const double w = quadrature::integrate_from_zero(
          [&](double x) { return model.breakage(x, y) * std::pow(x, -2.0 * sigma); }, y, rule);
      c = std::max(c, w * std::pow(y, 2.0 * sigma));
    }
    rep.C = c;
  } catch (const IntegrationError& e) {
    rep.h5_diverged = true;
    rep.violations.push_back(std::string("H5: weighted count integral diverges: ") + e.what());
  }

  std::vector<double> i1, i2;
  try {
    for (double y : ys) {
      i1.push_back(quadrature::integrate_from_zero([&](double x) { return std::pow(model.breakage(x, y), q); }, y, rule));
      i2.push_back(quadrature::integrate_from_zero(
          [&](double x) { return std::pow(x, -q * sigma) * std::pow(model.breakage(x, y), q); }, y, rule));
    }
  } catch (const IntegrationError& e) {
    rep.h6_diverged = true;
    rep.violations.push_back(std::string("H6: L^q integral diverges: ") + e.what());
    return rep;
  }

  const double lo = -2.0 * sigma - theta;
  const double hi = 1.0 - theta;
  auto fit = [&](std::span<const double> vals, double& tau, double& B, const char* label) {
    tau = detail::log_log_slope(ys, vals) / q;
    B = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) B = std::max(B, vals[i] / std::pow(ys[i], q * tau));
    if (tau < lo - 1e-9 || tau > hi + 1e-9) {
      rep.violations.push_back(std::string("H6: fitted ") + label + " = " + std::to_string(tau) +
                               " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  };
  fit(i1, rep.h6.tau1, rep.h6.B1, "tau1");
  fit(i2, rep.h6.tau2, rep.h6.B2, "tau2");
  return rep;
}

}  // namespace coagfrag
