#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"
#include "mmpc/rates.hpp"
#include "mmpc/sample_set.hpp"
#include "mmpc/scenario.hpp"
#include "mmpc/sim.hpp"
#include "mmpc/solver.hpp"

namespace mmpc {

struct ExperimentOutputs {
  EigenpairResult oer_solution;
  std::optional<EigenpairResult> uatf_solution;  // empty when the baseline is degenerate
  std::string uatf_degenerate_reason;

  // Per-user OER rates (nats, no pre-log) at each solution.
  std::vector<double> rates_at_oer_solution;
  std::vector<double> rates_at_uatf_solution;

  double min_oer_at_oer_solution = 0.0;
  double min_oer_at_uatf_solution = 0.0;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

inline MonotoneNormSpec norm_from_name(const std::string& name) {
  if (name == "l1") return MonotoneNormSpec::l1();
  if (name == "l2") return MonotoneNormSpec::l2();
  if (name == "linf") return MonotoneNormSpec::linf();
  throw ArgumentError("unknown norm '" + name + "'");
}

inline SolverConfig solver_config_from(const ScenarioConfig& config) {
  SolverConfig sc;
  sc.p_max = config.p_max;
  sc.norm = norm_from_name(config.norm);
  sc.tolerance = config.tolerance;
  sc.max_iterations = config.max_iterations;
  return sc;
}

// Writes the per-iteration worst-user OER objective for each solve, plus a
// horizontal reference line at the OER objective of the UatF solution.
// Rates are converted to bits and scaled by the pre-log factor unless
// raw_rates is set.
inline void emit_convergence_csv(const SampleSet& set, const UserWeights& weights,
                                 const IterationTrace& oer_trace,
                                 const IterationTrace* uatf_trace,
                                 std::optional<double> uatf_solution_oer_value,
                                 double rate_scale, const std::string& path) {
  if (oer_trace.empty()) throw ArgumentError("empty iteration trace");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CacheError("cannot open '" + path + "' for writing");
  out << "iteration,bound,objective_bits_per_symbol,thompson_step\n";
  auto emit = [&](const IterationTrace& trace, const char* bound) {
    for (const IterationRecord& rec : trace) {
      const double objective = min_weighted_rate(set, rec.power, weights) * rate_scale;
      out << rec.iteration << ',' << bound << ',' << detail::format_double(objective) << ','
          << detail::format_double(rec.thompson_step) << '\n';
    }
  };
  emit(oer_trace, "oer");
  if (uatf_trace) emit(*uatf_trace, "uatf");
  if (uatf_solution_oer_value) {
    const double value = *uatf_solution_oer_value * rate_scale;
    for (const IterationRecord& rec : oer_trace) {
      out << rec.iteration << ",uatf_solution_oer_value," << detail::format_double(value)
          << ",0\n";
    }
  }
  if (!out) throw CacheError("write to '" + path + "' failed");
}

inline void emit_rates_csv(const ExperimentOutputs& results, double rate_scale,
                           const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CacheError("cannot open '" + path + "' for writing");
  out << "user,rate_at_oer_solution,rate_at_uatf_solution\n";
  for (std::size_t u = 0; u < results.rates_at_oer_solution.size(); ++u) {
    out << u << ',' << detail::format_double(results.rates_at_oer_solution[u] * rate_scale)
        << ',';
    if (results.uatf_solution) {
      out << detail::format_double(results.rates_at_uatf_solution[u] * rate_scale);
    } else {
      out << "degenerate";
    }
    out << '\n';
  }
  if (!out) throw CacheError("write to '" + path + "' failed");
}

inline void emit_powers_csv(const ExperimentOutputs& results, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CacheError("cannot open '" + path + "' for writing");
  out << "user,power_oer_mw,power_uatf_mw,oer_converged,uatf_converged\n";
  for (std::size_t u = 0; u < results.oer_solution.power.size(); ++u) {
    out << u << ',' << detail::format_double(results.oer_solution.power[u]) << ',';
    if (results.uatf_solution) {
      out << detail::format_double(results.uatf_solution->power[u]);
    } else {
      out << "degenerate";
    }
    out << ',' << (results.oer_solution.converged ? 1 : 0) << ',';
    if (results.uatf_solution) {
      out << (results.uatf_solution->converged ? 1 : 0);
    } else {
      out << "degenerate";
    }
    out << '\n';
  }
  if (!out) throw CacheError("write to '" + path + "' failed");
}

// Solves the OER max-min problem and the UatF baseline on the same sample
// set, cross-evaluates per-user OER rates at both solutions, and writes
// convergence.csv, rates.csv, and powers.csv.
inline ExperimentOutputs run_experiment_on(const SampleSet& set, const ScenarioConfig& config,
                                           const std::string& out_dir, bool raw_rates = false) {
  const UserWeights weights = uniform_weights(set.num_users);
  const SolverConfig sc = solver_config_from(config);

  ExperimentOutputs results;
  results.oer_solution = conditional_eigenpair(build_oer_mapping(set, weights), sc);

  const MomentStats stats = moment_statistics(set);
  std::optional<IterationTrace> uatf_trace;
  try {
    results.uatf_solution =
        conditional_eigenpair(build_uatf_mapping(stats, weights, set.noise_power), sc);
    uatf_trace = results.uatf_solution->trace;
  } catch (const DegenerateUserError& e) {
    results.uatf_degenerate_reason = e.what();
  }

  results.rates_at_oer_solution = detail::oer_rates_all(set, results.oer_solution.power, nullptr);
  results.min_oer_at_oer_solution = min_weighted_rate(set, results.oer_solution.power, weights);
  if (results.uatf_solution) {
    results.rates_at_uatf_solution =
        detail::oer_rates_all(set, results.uatf_solution->power, nullptr);
    results.min_oer_at_uatf_solution =
        min_weighted_rate(set, results.uatf_solution->power, weights);
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const double rate_scale = raw_rates ? 1.0 : config.pre_log_factor() / std::log(2.0);
    std::optional<double> reference;
    if (results.uatf_solution) reference = results.min_oer_at_uatf_solution;
    emit_convergence_csv(set, weights, results.oer_solution.trace,
                         uatf_trace ? &*uatf_trace : nullptr, reference, rate_scale,
                         out_dir + "/convergence.csv");
    emit_rates_csv(results, rate_scale, out_dir + "/rates.csv");
    emit_powers_csv(results, out_dir + "/powers.csv");
  }
  return results;
}

inline ExperimentOutputs run_experiment(const ScenarioConfig& config, const std::string& out_dir,
                                        bool raw_rates = false) {
  return run_experiment_on(simulate_sample_set(config), config, out_dir, raw_rates);
}

}  // namespace mmpc
