// Command-line front end: simulate sample sets, solve max-min power control
// under the OER or UatF bound, compare both, and run property checks.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mmpc/mmpc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDegenerateError = 3;
constexpr int kExitIoError = 4;

mmpc::ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                                 std::optional<int> samples) {
  mmpc::ScenarioConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw mmpc::CacheError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::vector<std::string> warnings;
    config = mmpc::parse_scenario(buffer.str(), &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  }
  if (seed) config.seed = *seed;
  if (samples) config.sample_count = *samples;
  config.validate();
  return config;
}

void write_solution_csvs(const mmpc::SampleSet& set, const mmpc::EigenpairResult& solution,
                         const std::string& bound, double rate_scale,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const mmpc::UserWeights weights = mmpc::uniform_weights(set.num_users);

  std::ofstream conv(out_dir + "/convergence.csv", std::ios::trunc);
  conv << "iteration,bound,objective_bits_per_symbol,thompson_step\n";
  for (const mmpc::IterationRecord& rec : solution.trace) {
    conv << rec.iteration << ',' << bound << ','
         << mmpc::detail::format_double(mmpc::min_weighted_rate(set, rec.power, weights) *
                                        rate_scale)
         << ',' << mmpc::detail::format_double(rec.thompson_step) << '\n';
  }

  std::ofstream rates(out_dir + "/rates.csv", std::ios::trunc);
  rates << "user,rate\n";
  for (int u = 0; u < set.num_users; ++u) {
    rates << u << ','
          << mmpc::detail::format_double(mmpc::oer_rate(set, solution.power, u) * rate_scale)
          << '\n';
  }

  std::ofstream powers(out_dir + "/powers.csv", std::ios::trunc);
  powers << "user,power_mw,converged\n";
  for (int u = 0; u < set.num_users; ++u) {
    powers << u << ',' << mmpc::detail::format_double(solution.power[u]) << ','
           << (solution.converged ? 1 : 0) << '\n';
  }
}

int run_check(const mmpc::ScenarioConfig& config) {
  using namespace mmpc;
  const SampleSet set = simulate_sample_set(config);
  const UserWeights weights = uniform_weights(set.num_users);
  const InterferenceMapping mapping = build_oer_mapping(set, weights);
  const MomentStats stats = moment_statistics(set);

  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!ok && !detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  // MSP axioms on randomized probes.
  SubstreamRng rng(config.seed, 77);
  std::vector<MspProbe> probes;
  for (int i = 0; i < 100; ++i) {
    MspProbe probe;
    probe.x.resize(set.num_users);
    probe.y.resize(set.num_users);
    for (int u = 0; u < set.num_users; ++u) {
      probe.x[u] = std::exp(rng.next_uniform(-3.0, 3.0)) * config.p_max / set.num_users;
      probe.y[u] = std::exp(rng.next_uniform(-3.0, 3.0)) * config.p_max / set.num_users;
    }
    probe.scale = 1.0 + std::exp(rng.next_uniform(-4.0, 1.0));
    probes.push_back(std::move(probe));
  }
  double floor = std::numeric_limits<double>::infinity();
  for (int u = 0; u < set.num_users; ++u) {
    floor = std::min(floor, weights[u] * set.noise_power / stats.second(u, u));
  }
  const PropertyReport msp = verify_msp_properties(mapping, probes, floor * (1.0 - 1e-12));
  report("msp-monotonicity", msp.monotonicity.passed, msp.monotonicity.witness);
  report("msp-scalability", msp.scalability.passed, msp.scalability.witness);
  report("msp-positivity-floor", msp.positivity.passed, msp.positivity.witness);

  // Per-sample concavity of the extended cost on random convex combinations.
  bool concave = true;
  std::string concave_witness;
  for (int trial = 0; trial < 200 && concave; ++trial) {
    const int s = static_cast<int>(rng.next_u64() % set.sample_count);
    const int u = static_cast<int>(rng.next_u64() % set.num_users);
    std::vector<double> x(set.num_users), y(set.num_users), mix(set.num_users);
    const double lambda = rng.next_double();
    for (int i = 0; i < set.num_users; ++i) {
      x[i] = rng.next_double() < 0.1 ? 0.0 : rng.next_uniform(0.0, config.p_max);
      y[i] = rng.next_double() < 0.1 ? 0.0 : rng.next_uniform(0.0, config.p_max);
      mix[i] = lambda * x[i] + (1.0 - lambda) * y[i];
    }
    const double lhs = extended_sample_cost(set, s, u, mix);
    const double rhs = lambda * extended_sample_cost(set, s, u, x) +
                       (1.0 - lambda) * extended_sample_cost(set, s, u, y);
    if (lhs < rhs - 1e-9) {
      concave = false;
      concave_witness = "sample " + std::to_string(s) + ", user " + std::to_string(u);
    }
  }
  report("per-sample-concavity", concave, concave_witness);

  // UatF never exceeds OER on the same empirical distribution.
  bool ordered = true;
  for (int trial = 0; trial < 20 && ordered; ++trial) {
    PowerVector p(set.num_users);
    for (int u = 0; u < set.num_users; ++u) {
      p[u] = std::exp(rng.next_uniform(-2.0, 0.0)) * config.p_max;
    }
    for (int u = 0; u < set.num_users && ordered; ++u) {
      ordered = uatf_rate(stats, p, u, set.noise_power) <= oer_rate(set, p, u) + 1e-12;
    }
  }
  report("uatf-below-oer", ordered);

  return failures == 0 ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-min power control with tight ergodic-rate bounds"};
  app.require_subcommand(1);

  std::string config_path, cache_path, out_dir = ".", bound = "oer";
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> pmax_override, tol_override;
  std::optional<int> max_iters_override;
  std::optional<std::string> norm_override;
  unsigned workers = 1;
  bool raw_rates = false;

  auto* simulate = app.add_subcommand("simulate", "Generate a Monte Carlo sample cache");
  simulate->add_option("--config", config_path, "Scenario configuration file");
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--samples", samples, "Override the sample count");
  simulate->add_option("--workers", workers, "Worker threads (never changes results)");
  std::string cache_out = "samples.pcss";
  simulate->add_option("--out", cache_out, "Output cache path");

  auto* solve = app.add_subcommand("solve", "Solve max-min power control on a sample cache");
  solve->add_option("--cache", cache_path, "Sample cache file")->required();
  solve->add_option("--bound", bound, "Rate bound: oer or uatf")
      ->check(CLI::IsMember({"oer", "uatf"}));
  solve->add_option("--norm", norm_override, "Power constraint norm: l1, l2, or linf");
  solve->add_option("--pmax", pmax_override, "Power budget (mW)");
  solve->add_option("--tol", tol_override, "Thompson-metric stopping tolerance");
  solve->add_option("--max-iters", max_iters_override, "Iteration cap");
  solve->add_option("--config", config_path, "Scenario file (for reporting factors)");
  solve->add_option("--out-dir", out_dir, "Directory for CSV outputs");
  solve->add_option("--workers", workers, "Worker threads (never changes results)");
  solve->add_flag("--raw-rates", raw_rates, "Report raw nats without the pre-log factor");

  auto* compare = app.add_subcommand("compare", "Solve both bounds and cross-evaluate");
  compare->add_option("--config", config_path, "Scenario configuration file");
  compare->add_option("--cache", cache_path, "Use an existing sample cache instead of simulating");
  compare->add_option("--seed", seed, "Override the scenario seed");
  compare->add_option("--samples", samples, "Override the sample count");
  compare->add_option("--out-dir", out_dir, "Directory for CSV outputs");
  compare->add_option("--workers", workers, "Worker threads (never changes results)");
  compare->add_flag("--raw-rates", raw_rates, "Report raw nats without the pre-log factor");

  auto* check = app.add_subcommand("check", "Run the MSP/concavity property suites");
  check->add_option("--config", config_path, "Scenario configuration file");
  check->add_option("--seed", seed, "Override the scenario seed");
  check->add_option("--samples", samples, "Override the sample count");
  check->add_option("--workers", workers, "Worker threads (never changes results)");

  CLI11_PARSE(app, argc, argv);

  try {
    mmpc::global_worker_count() = workers;

    if (*simulate) {
      const mmpc::ScenarioConfig config = load_config(config_path, seed, samples);
      const mmpc::SampleSet set = mmpc::simulate_sample_set(config);
      mmpc::write_sample_cache(set, cache_out);
      std::cout << "wrote " << cache_out << " (S=" << set.sample_count
                << ", N=" << set.num_users << ", K=" << set.dimension << ")\n";
      return kExitOk;
    }

    if (*solve) {
      const mmpc::ScenarioConfig config = load_config(config_path, seed, samples);
      const mmpc::SampleSet set = mmpc::read_sample_cache(cache_path);
      mmpc::SolverConfig sc = mmpc::solver_config_from(config);
      if (pmax_override) sc.p_max = *pmax_override;
      if (tol_override) sc.tolerance = *tol_override;
      if (max_iters_override) sc.max_iterations = *max_iters_override;
      if (norm_override) sc.norm = mmpc::norm_from_name(*norm_override);
      sc.validate();

      const mmpc::UserWeights weights = mmpc::uniform_weights(set.num_users);
      mmpc::InterferenceMapping mapping;
      if (bound == "oer") {
        mapping = mmpc::build_oer_mapping(set, weights);
      } else {
        mapping = mmpc::build_uatf_mapping(mmpc::moment_statistics(set), weights,
                                           set.noise_power);
      }
      const mmpc::EigenpairResult solution = mmpc::conditional_eigenpair(mapping, sc);
      const double rate_scale = raw_rates ? 1.0 : config.pre_log_factor() / std::log(2.0);
      write_solution_csvs(set, solution, bound, rate_scale, out_dir);
      std::cout << "bound=" << bound << " eigenvalue=" << solution.eigenvalue
                << " iterations=" << solution.trace.size()
                << " converged=" << (solution.converged ? "yes" : "no") << "\n";
      if (!solution.converged) std::cerr << "warning: iteration cap reached before tolerance\n";
      return kExitOk;
    }

    if (*compare) {
      const mmpc::ScenarioConfig config = load_config(config_path, seed, samples);
      const mmpc::SampleSet set = cache_path.empty() ? mmpc::simulate_sample_set(config)
                                                     : mmpc::read_sample_cache(cache_path);
      const mmpc::ExperimentOutputs results =
          mmpc::run_experiment_on(set, config, out_dir, raw_rates);
      std::cout << "min OER at OER solution:  " << results.min_oer_at_oer_solution << " nats\n";
      if (results.uatf_solution) {
        std::cout << "min OER at UatF solution: " << results.min_oer_at_uatf_solution
                  << " nats\n";
      } else {
        std::cout << "UatF baseline degenerate: " << results.uatf_degenerate_reason << "\n";
      }
      return kExitOk;
    }

    const mmpc::ScenarioConfig config = load_config(config_path, seed, samples);
    return run_check(config);
  } catch (const mmpc::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const mmpc::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const mmpc::DegenerateUserError& e) {
    std::cerr << "degenerate input: " << e.what() << "\n";
    return kExitDegenerateError;
  } catch (const mmpc::CacheError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIoError;
  }
}
