#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "test_helpers.hpp"

using namespace mmpc;
using mmpc_test::make_set;
using mmpc_test::scaled_down_config;
using mmpc_test::scaled_down_set;

namespace {

// Straight-loop re-evaluation of the OER, independent of the library's
// gain caching and pairwise reduction.
double oer_oracle(const SampleSet& set, const PowerVector& p, int u) {
  long double acc = 0.0L;
  for (int s = 0; s < set.sample_count; ++s) {
    const Complex* v = set.beamformer(s, u);
    long double interference = 0.0L;
    long double signal = 0.0L;
    for (int k = 0; k < set.num_users; ++k) {
      const Complex* h = set.channel(s, k);
      Complex inner = 0.0;
      for (int d = 0; d < set.dimension; ++d) inner += std::conj(v[d]) * h[d];
      if (k == u) {
        signal = p[u] * std::norm(inner);
      } else {
        interference += p[k] * std::norm(inner);
      }
    }
    acc += std::log(1.0L + signal / (interference + set.noise_power));
  }
  return static_cast<double>(acc / set.sample_count);
}

}  // namespace

TEST_CASE("instantaneous_sinr hand-checked cases") {
  // Orthogonal channels: no interference.
  auto set1 = make_set(2, 2, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}, 1.0);
  CHECK(instantaneous_sinr(set1, 0, {2.0, 3.0}, 0, 1.0) == Catch::Approx(2.0));

  // Single user: p |h|^2 / sigma^2.
  auto set2 = make_set(1, 1, {{2}}, {{1}}, 4.0);
  CHECK(instantaneous_sinr(set2, 0, {3.0}, 0, 4.0) == Catch::Approx(3.0));

  // Overlapping channel: interference power 4 * 0.5.
  const double r = 1.0 / std::sqrt(2.0);
  auto set3 = make_set(2, 2, {{1, 0}, {r, r}}, {{1, 0}, {r, r}}, 1.0);
  CHECK(instantaneous_sinr(set3, 0, {1.0, 4.0}, 0, 1.0) == Catch::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(instantaneous_sinr(set2, 0, {3.0}, 5, 4.0), ArgumentError);
}

TEST_CASE("oer_rate is the empirical mean of log(1 + SINR)") {
  // Two samples with SINRs 1 and 3 at p=1, sigma^2=1.
  auto set = make_set(1, 1, {{1}, {std::sqrt(3.0)}}, {{1}, {1}}, 1.0);
  CHECK(oer_rate(set, {1.0}, 0) ==
        Catch::Approx((std::log(2.0) + std::log(4.0)) / 2.0).epsilon(1e-14));
}

TEST_CASE("oer_rate matches the straight-loop oracle on the scaled-down scenario") {
  const SampleSet& set = scaled_down_set();
  const PowerVector p(set.num_users, 200.0);
  for (int u = 0; u < set.num_users; ++u) {
    const double expected = oer_oracle(set, p, u);
    CHECK(oer_rate(set, p, u) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("oer_msp_value is p_u over the rate, with a positivity floor") {
  auto set = make_set(1, 1, {{1}}, {{1}}, 1.0);
  CHECK(oer_msp_value(set, {1.0}, 0) == Catch::Approx(1.0 / std::log(2.0)));

  const SampleSet& scenario = scaled_down_set();
  const MomentStats stats = moment_statistics(scenario);
  SubstreamRng rng(9, 0);
  for (int trial = 0; trial < 20; ++trial) {
    PowerVector p(scenario.num_users);
    for (double& x : p) x = std::exp(rng.next_uniform(-4.0, 2.0)) * 200.0;
    for (int u = 0; u < scenario.num_users; ++u) {
      CHECK(oer_msp_value(scenario, p, u) >=
            scenario.noise_power / stats.second(u, u) * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("build_oer_mapping evaluates alpha_u * f_u and ignores uniform weight scaling") {
  const SampleSet& set = scaled_down_set();
  UserWeights weights(set.num_users);
  SubstreamRng rng(13, 0);
  for (double& w : weights) w = std::exp(rng.next_uniform(-1.0, 1.0));

  const InterferenceMapping mapping = build_oer_mapping(set, weights);
  PowerVector p(set.num_users);
  for (double& x : p) x = std::exp(rng.next_uniform(-2.0, 1.0)) * 200.0;
  const PowerVector out = mapping.evaluate(p);
  for (int u = 0; u < set.num_users; ++u) {
    CHECK(out[u] == Catch::Approx(weights[u] * oer_msp_value(set, p, u)).epsilon(1e-13));
  }

  // Rescaling all weights leaves the solved power vector unchanged.
  UserWeights scaled = weights;
  for (double& w : scaled) w *= 5.0;
  SolverConfig config;
  config.p_max = 200.0;
  const EigenpairResult r1 = conditional_eigenpair(mapping, config);
  const EigenpairResult r2 = conditional_eigenpair(build_oer_mapping(set, scaled), config);
  REQUIRE(r1.converged);
  CHECK(thompson_metric(r1.power, r2.power) <= config.tolerance);
}

TEST_CASE("build_oer_mapping rejects users with no effective channel") {
  SampleSet set = make_set(2, 2, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}, 1.0);
  // Zero out user 1's overlap with its own beamformer in every sample.
  set.channels[3] = 0.0;
  CHECK_THROWS_AS(build_oer_mapping(set, uniform_weights(2)), DegenerateUserError);
}

TEST_CASE("moment_statistics two-point cases") {
  auto set = make_set(1, 1, {{1}, {3}}, {{1}, {1}}, 1.0);
  const MomentStats stats = moment_statistics(set);
  CHECK(stats.mean_inner[0].real() == Catch::Approx(2.0));
  CHECK(stats.second(0, 0) == Catch::Approx(5.0));

  auto zero_mean = make_set(1, 1, {{1}, {-1}}, {{1}, {1}}, 1.0);
  const MomentStats zstats = moment_statistics(zero_mean);
  CHECK(std::abs(zstats.mean_inner[0]) == 0.0);
  CHECK(zstats.second(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("moment_statistics matches a straight-loop oracle on the scaled-down scenario") {
  const SampleSet& set = scaled_down_set();
  const MomentStats stats = moment_statistics(set);
  for (int u = 0; u < set.num_users; ++u) {
    std::complex<long double> mean = 0.0L;
    for (int k = 0; k < set.num_users; ++k) {
      long double second = 0.0L;
      for (int s = 0; s < set.sample_count; ++s) {
        const Complex* v = set.beamformer(s, u);
        const Complex* h = set.channel(s, k);
        Complex inner = 0.0;
        for (int d = 0; d < set.dimension; ++d) inner += std::conj(v[d]) * h[d];
        second += std::norm(inner);
        if (k == u) mean += inner;
      }
      CHECK(stats.second(u, k) ==
            Catch::Approx(static_cast<double>(second / set.sample_count)).epsilon(1e-12));
    }
    CHECK(std::abs(stats.mean_inner[u] -
                   Complex(static_cast<double>(mean.real() / set.sample_count),
                           static_cast<double>(mean.imag() / set.sample_count))) <
          1e-12 * (1.0 + std::abs(stats.mean_inner[u])));
  }
}

TEST_CASE("uatf_rate hand-checked cases") {
  // Zero-mean effective channel: the bound is identically zero.
  auto zero_mean = make_set(1, 1, {{1}, {-1}}, {{1}, {1}}, 1.0);
  const MomentStats zstats = moment_statistics(zero_mean);
  for (double p : {0.1, 1.0, 100.0}) {
    CHECK(uatf_rate(zstats, {p}, 0, 1.0) == 0.0);
  }

  // Deterministic channel: UatF equals OER.
  auto det = make_set(1, 1, {{1}}, {{1}}, 1.0);
  CHECK(uatf_rate(moment_statistics(det), {1.0}, 0, 1.0) == Catch::Approx(std::log(2.0)));

  // Two-point channel h in {1, 3}: ln 3, strictly below the OER value.
  auto two_point = make_set(1, 1, {{1}, {3}}, {{1}, {1}}, 1.0);
  const MomentStats stats = moment_statistics(two_point);
  const double uatf = uatf_rate(stats, {1.0}, 0, 1.0);
  CHECK(uatf == Catch::Approx(std::log(3.0)));
  const double oer = oer_rate(two_point, {1.0}, 0);
  CHECK(oer == Catch::Approx((std::log(2.0) + std::log(10.0)) / 2.0));
  CHECK(uatf < oer);
}

TEST_CASE("build_uatf_mapping agrees with the OER mapping on one-point distributions") {
  auto set = make_set(2, 2, {{1, Complex(0, 0.5)}, {Complex(0.2, 0.1), 1}},
                      {{1, Complex(0, 0.5)}, {Complex(0.2, 0.1), 1}}, 0.7);
  const auto oer_map = build_oer_mapping(set, uniform_weights(2));
  const auto uatf_map =
      build_uatf_mapping(moment_statistics(set), uniform_weights(2), set.noise_power);
  SubstreamRng rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    PowerVector p = {std::exp(rng.next_uniform(-3.0, 3.0)), std::exp(rng.next_uniform(-3.0, 3.0))};
    const PowerVector a = oer_map.evaluate(p);
    const PowerVector b = uatf_map.evaluate(p);
    for (int u = 0; u < 2; ++u) CHECK(a[u] == Catch::Approx(b[u]).epsilon(1e-12));
  }
}

TEST_CASE("build_uatf_mapping rejects zero-mean users") {
  auto zero_mean = make_set(1, 1, {{1}, {-1}}, {{1}, {1}}, 1.0);
  CHECK_THROWS_AS(
      build_uatf_mapping(moment_statistics(zero_mean), uniform_weights(1), 1.0),
      DegenerateUserError);
}

TEST_CASE("min_weighted_rate and equalization at the fixed point") {
  auto set = make_set(1, 1, {{1}, {std::sqrt(3.0)}}, {{1}, {1}}, 1.0);
  CHECK(min_weighted_rate(set, {1.0}, {1.0}) == Catch::Approx(oer_rate(set, {1.0}, 0)));

  const SampleSet& scenario = scaled_down_set();
  UserWeights weights(scenario.num_users);
  SubstreamRng rng(31, 0);
  for (double& w : weights) w = std::exp(rng.next_uniform(-0.5, 0.5));
  SolverConfig config;
  config.p_max = 200.0;
  const EigenpairResult result =
      conditional_eigenpair(build_oer_mapping(scenario, weights), config);
  REQUIRE(result.converged);
  // At the fixed point all weighted rates coincide: r_u(p*) = alpha_u / gamma*.
  std::vector<double> weighted(scenario.num_users);
  for (int u = 0; u < scenario.num_users; ++u) {
    weighted[u] = oer_rate(scenario, result.power, u) / weights[u];
  }
  const double reference = weighted[0];
  for (double w : weighted) CHECK(w == Catch::Approx(reference).epsilon(1e-6));
  CHECK(min_weighted_rate(scenario, result.power, weights) ==
        Catch::Approx(reference).epsilon(1e-6));
}

TEST_CASE("uatf_rate never exceeds oer_rate on the same empirical distribution") {
  const SampleSet& set = scaled_down_set();
  const MomentStats stats = moment_statistics(set);
  SubstreamRng rng(37, 0);
  for (int trial = 0; trial < 20; ++trial) {
    PowerVector p(set.num_users);
    for (double& x : p) x = std::exp(rng.next_uniform(-3.0, 1.0)) * 200.0;
    for (int u = 0; u < set.num_users; ++u) {
      CHECK(uatf_rate(stats, p, u, set.noise_power) <= oer_rate(set, p, u) + 1e-12);
    }
  }
}

TEST_CASE("per-sample unit-modulus beamformer phases: OER bit-identical, UatF not") {
  const SampleSet& set = scaled_down_set();
  SampleSet rotated = set;
  SubstreamRng rng(41, 0);
  // Fourth roots of unity multiply exactly in IEEE arithmetic.
  const Complex phases[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int s = 0; s < set.sample_count; ++s) {
    for (int u = 0; u < set.num_users; ++u) {
      const Complex c = phases[rng.next_u64() % 4];
      Complex* v = rotated.beamformers.data() +
                   (static_cast<std::size_t>(s) * set.num_users + u) * set.dimension;
      for (int d = 0; d < set.dimension; ++d) v[d] *= c;
    }
  }
  const PowerVector p(set.num_users, 200.0);
  bool uatf_changed = false;
  const MomentStats stats = moment_statistics(set);
  const MomentStats rstats = moment_statistics(rotated);
  for (int u = 0; u < set.num_users; ++u) {
    CHECK(oer_rate(set, p, u) == oer_rate(rotated, p, u));  // bitwise
    if (uatf_rate(stats, p, u, set.noise_power) != uatf_rate(rstats, p, u, set.noise_power)) {
      uatf_changed = true;
    }
  }
  CHECK(uatf_changed);
}

TEST_CASE("rate evaluation is bit-identical across worker counts") {
  const SampleSet& set = scaled_down_set();
  const PowerVector p(set.num_users, 123.456);
  const unsigned saved = global_worker_count();
  global_worker_count() = 1;
  std::vector<double> rates1(set.num_users);
  for (int u = 0; u < set.num_users; ++u) rates1[u] = oer_rate(set, p, u);
  const MomentStats stats1 = moment_statistics(set);
  global_worker_count() = 8;
  for (int u = 0; u < set.num_users; ++u) CHECK(oer_rate(set, p, u) == rates1[u]);
  const MomentStats stats8 = moment_statistics(set);
  global_worker_count() = saved;
  CHECK(stats1.mean_inner == stats8.mean_inner);
  CHECK(stats1.second_moment == stats8.second_moment);
}

TEST_CASE("extended_sample_cost boundary value and concavity spot checks") {
  const SampleSet& set = scaled_down_set();
  SubstreamRng rng(43, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int s = static_cast<int>(rng.next_u64() % set.sample_count);
    const int u = static_cast<int>(rng.next_u64() % set.num_users);

    // Boundary: at p = 0 the value is sigma^2 / |h_u^H v_u|^2 exactly.
    const Complex* h = set.channel(s, u);
    const Complex* v = set.beamformer(s, u);
    Complex inner = 0.0;
    for (int d = 0; d < set.dimension; ++d) inner += std::conj(v[d]) * h[d];
    const std::vector<double> zero(set.num_users, 0.0);
    CHECK(extended_sample_cost(set, s, u, zero) == set.noise_power / std::norm(inner));

    std::vector<double> x(set.num_users), y(set.num_users), mix(set.num_users);
    const double lambda = rng.next_double();
    for (int i = 0; i < set.num_users; ++i) {
      x[i] = rng.next_double() < 0.15 ? 0.0 : rng.next_uniform(0.0, 200.0);
      y[i] = rng.next_double() < 0.15 ? 0.0 : rng.next_uniform(0.0, 200.0);
      mix[i] = lambda * x[i] + (1.0 - lambda) * y[i];
    }
    const double lhs = extended_sample_cost(set, s, u, mix);
    const double rhs = lambda * extended_sample_cost(set, s, u, x) +
                       (1.0 - lambda) * extended_sample_cost(set, s, u, y);
    CHECK(lhs >= rhs - 1e-9);
  }
}
