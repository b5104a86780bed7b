#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmpc/errors.hpp"
#include "mmpc/norms.hpp"

namespace mmpc {

// A mapping T: R^N_{++} -> R^N_{++} declared to be monotonic, scalable, and
// positive. The declaration cannot be enforced structurally; see
// verify_msp_properties for a statistical check.
struct InterferenceMapping {
  int dimension = 0;
  std::function<PowerVector(const PowerVector&)> evaluate;
};

struct SolverConfig {
  double p_max = 200.0;  // mW
  MonotoneNormSpec norm = MonotoneNormSpec::linf();
  double tolerance = 1e-8;  // Thompson-metric stopping threshold
  int max_iterations = 500;
  PowerVector initial_point;  // empty: all entries p_max / N

  void validate() const {
    if (!(p_max > 0.0)) throw ArgumentError("p_max must be positive");
    if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
    if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    if (!initial_point.empty()) check_strictly_positive(initial_point, "initial_point");
  }
};

struct IterationRecord {
  int iteration = 0;
  double thompson_step = 0.0;
  double mapping_norm = 0.0;  // ||T(p_n)|| under the configured norm
  PowerVector power;
};

using IterationTrace = std::vector<IterationRecord>;

// Solution of T(p) = gamma p with ||p|| = p_max. The eigenvalue is reported
// for the scaled norm ||.||/p_max, so 1/gamma is the max-min objective value.
struct EigenpairResult {
  PowerVector power;
  double eigenvalue = 0.0;
  IterationTrace trace;
  bool converged = false;
};

namespace detail {

inline PowerVector evaluate_checked(const InterferenceMapping& mapping, const PowerVector& p) {
  PowerVector out = mapping.evaluate(p);
  if (static_cast<int>(out.size()) != mapping.dimension) {
    throw MappingContractError("mapping returned dimension " + std::to_string(out.size()) +
                               ", expected " + std::to_string(mapping.dimension));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0) || !std::isfinite(out[i])) {
      throw MappingContractError("mapping output coordinate " + std::to_string(i) +
                                 " is not strictly positive and finite");
    }
  }
  return out;
}

}  // namespace detail

// Normalized fixed-point iteration p <- (p_max / ||T(p)||) T(p). For an MSP
// mapping this converges to the unique conditional eigenvector, which solves
// the weighted max-min power control problem under the norm constraint.
inline EigenpairResult conditional_eigenpair(const InterferenceMapping& mapping,
                                             const SolverConfig& config) {
  config.validate();
  if (mapping.dimension < 1) throw ArgumentError("mapping dimension must be >= 1");
  if (!mapping.evaluate) throw ArgumentError("mapping has no evaluate function");

  const int n = mapping.dimension;
  PowerVector p = config.initial_point;
  if (p.empty()) p.assign(n, config.p_max / n);
  if (static_cast<int>(p.size()) != n) {
    throw ArgumentError("initial_point dimension does not match mapping dimension");
  }

  EigenpairResult result;
  result.trace.reserve(static_cast<std::size_t>(config.max_iterations));

  double t_norm = 0.0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    PowerVector tp = detail::evaluate_checked(mapping, p);
    t_norm = norm_value(config.norm, tp);
    PowerVector next(tp.size());
    const double scale = config.p_max / t_norm;
    for (std::size_t i = 0; i < tp.size(); ++i) next[i] = scale * tp[i];

    const double step = thompson_metric(next, p);
    result.trace.push_back({it, step, t_norm, next});
    p = std::move(next);
    if (step <= config.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.power = std::move(p);
  result.eigenvalue = norm_value(config.norm, detail::evaluate_checked(mapping, result.power)) /
                      config.p_max;
  return result;
}

// One probe for the MSP axiom checker: two strictly positive points and a
// scale factor > 1. Monotonicity is checked on (min(x,y), max(x,y)).
struct MspProbe {
  PowerVector x;
  PowerVector y;
  double scale = 2.0;
};

struct AxiomReport {
  bool passed = true;
  std::string witness;  // description of the first failing probe
};

struct PropertyReport {
  AxiomReport monotonicity;
  AxiomReport scalability;
  AxiomReport positivity;
  double output_infimum = 0.0;  // running infimum of coordinate outputs

  bool all_passed() const {
    return monotonicity.passed && scalability.passed && positivity.passed;
  }
};

namespace detail {

inline std::string describe_vector(const PowerVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + ")";
}

}  // namespace detail

// Statistical check of the three MSP axioms on a set of probes. Positivity is
// reported as the running infimum of output coordinates; the caller supplies a
// floor to fail against (0 disables the check beyond strict positivity).
inline PropertyReport verify_msp_properties(const InterferenceMapping& mapping,
                                            const std::vector<MspProbe>& probes,
                                            double positivity_floor = 0.0) {
  PropertyReport report;
  report.output_infimum = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < probes.size(); ++i) {
    const MspProbe& probe = probes[i];
    check_strictly_positive(probe.x, "probe.x");
    check_strictly_positive(probe.y, "probe.y");
    if (probe.x.size() != probe.y.size() ||
        static_cast<int>(probe.x.size()) != mapping.dimension) {
      throw ArgumentError("probe " + std::to_string(i) + ": dimension mismatch");
    }
    if (!(probe.scale > 1.0)) {
      throw ArgumentError("probe " + std::to_string(i) + ": scale must be > 1");
    }

    PowerVector lo(probe.x.size()), hi(probe.x.size());
    for (std::size_t k = 0; k < probe.x.size(); ++k) {
      lo[k] = std::min(probe.x[k], probe.y[k]);
      hi[k] = std::max(probe.x[k], probe.y[k]);
    }

    const PowerVector t_lo = detail::evaluate_checked(mapping, lo);
    const PowerVector t_hi = detail::evaluate_checked(mapping, hi);
    for (std::size_t k = 0; k < t_lo.size(); ++k) {
      if (report.monotonicity.passed && t_lo[k] > t_hi[k]) {
        report.monotonicity.passed = false;
        report.monotonicity.witness = "probe " + std::to_string(i) + ", coordinate " +
                                      std::to_string(k) + ": T(x)=" +
                                      detail::describe_vector(t_lo) +
                                      " exceeds T(y)=" + detail::describe_vector(t_hi);
      }
      report.output_infimum = std::min({report.output_infimum, t_lo[k], t_hi[k]});
    }

    PowerVector scaled(probe.x.size());
    for (std::size_t k = 0; k < probe.x.size(); ++k) scaled[k] = probe.scale * probe.x[k];
    const PowerVector t_x = detail::evaluate_checked(mapping, probe.x);
    const PowerVector t_scaled = detail::evaluate_checked(mapping, scaled);
    for (std::size_t k = 0; k < t_x.size(); ++k) {
      if (report.scalability.passed && !(t_scaled[k] < probe.scale * t_x[k])) {
        report.scalability.passed = false;
        report.scalability.witness = "probe " + std::to_string(i) + ", coordinate " +
                                     std::to_string(k) + ": T(ax)_k=" +
                                     std::to_string(t_scaled[k]) + " not < a*T(x)_k=" +
                                     std::to_string(probe.scale * t_x[k]);
      }
      report.output_infimum = std::min({report.output_infimum, t_x[k], t_scaled[k]});
    }
  }

  if (!(report.output_infimum > positivity_floor)) {
    report.positivity.passed = false;
    report.positivity.witness = "running infimum " + std::to_string(report.output_infimum) +
                                " not above floor " + std::to_string(positivity_floor);
  }
  return report;
}

}  // namespace mmpc
