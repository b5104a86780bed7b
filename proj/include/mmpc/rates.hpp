#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"
#include "mmpc/norms.hpp"
#include "mmpc/reduction.hpp"
#include "mmpc/sample_set.hpp"
#include "mmpc/solver.hpp"

namespace mmpc {

// Positive per-user priorities in the weighted max-min objective.
using UserWeights = std::vector<double>;

inline UserWeights uniform_weights(int n) { return UserWeights(static_cast<std::size_t>(n), 1.0); }

namespace detail {

// Effective channel gains of one sample: gain(u, k) = |h_k^H v_u|^2.
// Precomputing these makes repeated rate evaluations along the solver
// trajectory independent of K.
struct SampleGains {
  int num_users = 0;
  std::vector<double> gain;  // row-major N x N, gain[u*N + k]

  double operator()(int u, int k) const { return gain[static_cast<std::size_t>(u) * num_users + k]; }
};

inline SampleGains compute_sample_gains(const SampleSet& set, int s) {
  const int n = set.num_users;
  const int dim = set.dimension;
  SampleGains g;
  g.num_users = n;
  g.gain.resize(static_cast<std::size_t>(n) * n);
  for (int u = 0; u < n; ++u) {
    const Complex* v = set.beamformer(s, u);
    for (int k = 0; k < n; ++k) {
      const Complex* h = set.channel(s, k);
      Complex inner = 0.0;
      for (int d = 0; d < dim; ++d) inner += std::conj(v[d]) * h[d];
      g.gain[static_cast<std::size_t>(u) * n + k] = std::norm(inner);
    }
  }
  return g;
}

inline double sinr_from_gains(const SampleGains& g, const PowerVector& p, int u, double sigma2) {
  double interference = 0.0;
  for (int k = 0; k < g.num_users; ++k) {
    if (k != u) interference += p[k] * g(u, k);
  }
  return p[u] * g(u, u) / (interference + sigma2);
}

inline void check_user_index(int u, int n) {
  if (u < 0 || u >= n) {
    throw ArgumentError("user index " + std::to_string(u) + " out of range [0, " +
                        std::to_string(n) + ")");
  }
}

}  // namespace detail

// Instantaneous SINR of user u for one (channel, beamformer) realization.
inline double instantaneous_sinr(const SampleSet& set, int s, const PowerVector& p, int u,
                                 double sigma2) {
  detail::check_user_index(u, set.num_users);
  if (s < 0 || s >= set.sample_count) throw ArgumentError("sample index out of range");
  if (static_cast<int>(p.size()) != set.num_users) throw ArgumentError("power dimension mismatch");
  if (!(sigma2 > 0.0)) throw ArgumentError("noise power must be positive");
  check_strictly_positive(p, "p");
  return detail::sinr_from_gains(detail::compute_sample_gains(set, s), p, u, sigma2);
}

namespace detail {

// Per-sample rate terms for every user, reduced over the fixed pairwise tree.
// Returns rates in nats. `gains`, when provided, must hold one entry per sample.
inline std::vector<double> oer_rates_all(const SampleSet& set, const PowerVector& p,
                                         const std::vector<SampleGains>* gains) {
  const int s_count = set.sample_count;
  const int n = set.num_users;
  std::vector<double> terms(static_cast<std::size_t>(s_count) * n);
  parallel_for(static_cast<std::size_t>(s_count), global_worker_count(), [&](std::size_t s) {
    SampleGains local;
    const SampleGains& g = gains ? (*gains)[s] : (local = compute_sample_gains(set, static_cast<int>(s)));
    for (int u = 0; u < n; ++u) {
      terms[static_cast<std::size_t>(u) * s_count + s] =
          std::log1p(sinr_from_gains(g, p, u, set.noise_power));
    }
  });
  std::vector<double> rates(n);
  for (int u = 0; u < n; ++u) {
    rates[u] = pairwise_sum(std::span<const double>(terms).subspan(
                   static_cast<std::size_t>(u) * s_count, s_count)) /
               s_count;
  }
  return rates;
}

}  // namespace detail

// Optimistic ergodic rate of user u in nats: the empirical mean of
// log(1 + SINR) over the sample set, with a deterministic reduction order.
inline double oer_rate(const SampleSet& set, const PowerVector& p, int u) {
  detail::check_user_index(u, set.num_users);
  if (static_cast<int>(p.size()) != set.num_users) throw ArgumentError("power dimension mismatch");
  check_strictly_positive(p, "p");
  return detail::oer_rates_all(set, p, nullptr)[u];
}

// The MSP utility f_u(p) = p_u / r_u(p).
inline double oer_msp_value(const SampleSet& set, const PowerVector& p, int u) {
  const double rate = oer_rate(set, p, u);
  if (rate == 0.0) {
    throw DegenerateUserError(u, "user " + std::to_string(u) +
                                     " has zero rate; it cannot be served");
  }
  return p[u] / rate;
}

// Minimum over users of r_u(p) / alpha_u; the max-min objective in nats.
inline double min_weighted_rate(const SampleSet& set, const PowerVector& p,
                                const UserWeights& weights) {
  if (static_cast<int>(weights.size()) != set.num_users) {
    throw ArgumentError("weights dimension mismatch");
  }
  check_strictly_positive(weights, "weights");
  const std::vector<double> rates = detail::oer_rates_all(set, p, nullptr);
  double m = std::numeric_limits<double>::infinity();
  for (int u = 0; u < set.num_users; ++u) m = std::min(m, rates[u] / weights[u]);
  return m;
}

// Builds T(p) = [alpha_u * p_u / r_u(p)]_u over the empirical distribution.
// Pre-screens each user for a nonzero effective channel; effective-channel
// gains are cached per sample so solver iterations avoid the O(K) inner
// products.
inline InterferenceMapping build_oer_mapping(const SampleSet& set, const UserWeights& weights) {
  set.validate();
  if (static_cast<int>(weights.size()) != set.num_users) {
    throw ArgumentError("weights dimension mismatch");
  }
  check_strictly_positive(weights, "weights");

  auto gains = std::make_shared<std::vector<detail::SampleGains>>(set.sample_count);
  parallel_for(static_cast<std::size_t>(set.sample_count), global_worker_count(),
               [&](std::size_t s) {
                 (*gains)[s] = detail::compute_sample_gains(set, static_cast<int>(s));
               });
  for (int u = 0; u < set.num_users; ++u) {
    bool has_signal = false;
    for (int s = 0; s < set.sample_count && !has_signal; ++s) {
      has_signal = (*gains)[s](u, u) > 0.0;
    }
    if (!has_signal) {
      throw DegenerateUserError(u, "user " + std::to_string(u) +
                                       " has zero effective channel in all samples");
    }
  }

  auto set_copy = std::make_shared<SampleSet>(set);
  const int n = set.num_users;
  InterferenceMapping mapping;
  mapping.dimension = n;
  mapping.evaluate = [set_copy, gains, weights, n](const PowerVector& p) {
    if (static_cast<int>(p.size()) != n) throw ArgumentError("power dimension mismatch");
    check_strictly_positive(p, "p");
    const std::vector<double> rates = detail::oer_rates_all(*set_copy, p, gains.get());
    PowerVector out(n);
    for (int u = 0; u < n; ++u) {
      if (rates[u] == 0.0) {
        throw DegenerateUserError(u, "user " + std::to_string(u) + " rate underflowed to zero");
      }
      out[u] = weights[u] * p[u] / rates[u];
    }
    return out;
  };
  return mapping;
}

// Sample moments of the effective channels, the sufficient statistics of the
// UatF bound: mean of v_u^H h_u and mean of |v_u^H h_k|^2.
struct MomentStats {
  int num_users = 0;
  std::vector<Complex> mean_inner;       // per user u
  std::vector<double> second_moment;     // row-major N x N, [u*N + k]

  double second(int u, int k) const {
    return second_moment[static_cast<std::size_t>(u) * num_users + k];
  }
};

inline MomentStats moment_statistics(const SampleSet& set) {
  const int n = set.num_users;
  const int s_count = set.sample_count;
  MomentStats stats;
  stats.num_users = n;
  stats.mean_inner.resize(n);
  stats.second_moment.resize(static_cast<std::size_t>(n) * n);

  // Per-sample inner products, reduced per (u, k) over the fixed tree.
  std::vector<Complex> inners(static_cast<std::size_t>(s_count) * n * n);
  parallel_for(static_cast<std::size_t>(s_count), global_worker_count(), [&](std::size_t s) {
    for (int u = 0; u < n; ++u) {
      const Complex* v = set.beamformer(static_cast<int>(s), u);
      for (int k = 0; k < n; ++k) {
        const Complex* h = set.channel(static_cast<int>(s), k);
        Complex inner = 0.0;
        for (int d = 0; d < set.dimension; ++d) inner += std::conj(v[d]) * h[d];
        inners[(static_cast<std::size_t>(u) * n + k) * s_count + s] = inner;
      }
    }
  });

  std::vector<double> re(s_count), im(s_count), sq(s_count);
  for (int u = 0; u < n; ++u) {
    for (int k = 0; k < n; ++k) {
      const Complex* row = inners.data() + (static_cast<std::size_t>(u) * n + k) * s_count;
      for (int s = 0; s < s_count; ++s) {
        re[s] = row[s].real();
        im[s] = row[s].imag();
        sq[s] = std::norm(row[s]);
      }
      stats.second_moment[static_cast<std::size_t>(u) * n + k] = pairwise_sum(sq) / s_count;
      if (k == u) {
        stats.mean_inner[u] = Complex(pairwise_sum(re) / s_count, pairwise_sum(im) / s_count);
      }
    }
  }
  return stats;
}

// UatF rate in nats: the effective channel is replaced by its mean and all
// deviation is treated as noise. Zero whenever the mean vanishes.
inline double uatf_rate(const MomentStats& stats, const PowerVector& p, int u, double sigma2) {
  detail::check_user_index(u, stats.num_users);
  if (static_cast<int>(p.size()) != stats.num_users) throw ArgumentError("power dimension mismatch");
  check_strictly_positive(p, "p");
  if (!(sigma2 > 0.0)) throw ArgumentError("noise power must be positive");

  const double signal = p[u] * std::norm(stats.mean_inner[u]);
  double denom = sigma2 - signal;
  for (int k = 0; k < stats.num_users; ++k) denom += p[k] * stats.second(u, k);
  return std::log1p(signal / denom);
}

// T(p) for the UatF bound, solved with the same fixed-point engine.
inline InterferenceMapping build_uatf_mapping(const MomentStats& stats, const UserWeights& weights,
                                              double sigma2) {
  const int n = stats.num_users;
  if (static_cast<int>(weights.size()) != n) throw ArgumentError("weights dimension mismatch");
  check_strictly_positive(weights, "weights");
  for (int u = 0; u < n; ++u) {
    if (std::norm(stats.mean_inner[u]) == 0.0) {
      throw DegenerateUserError(u, "user " + std::to_string(u) +
                                       " has zero mean effective channel; the UatF max-min "
                                       "problem is degenerate");
    }
  }
  InterferenceMapping mapping;
  mapping.dimension = n;
  mapping.evaluate = [stats, weights, sigma2, n](const PowerVector& p) {
    PowerVector out(n);
    for (int u = 0; u < n; ++u) {
      const double rate = uatf_rate(stats, p, u, sigma2);
      if (rate == 0.0) {
        throw DegenerateUserError(u, "user " + std::to_string(u) + " UatF rate is zero");
      }
      out[u] = weights[u] * p[u] / rate;
    }
    return out;
  };
  return mapping;
}

// Continuous extension of the per-sample cost p_u / log(1 + s_u(p)) to the
// nonnegative cone; its value at p_u = 0 is the interference-plus-noise power
// divided by the effective channel gain (sigma^2 / |h_u^H v_u|^2 at p = 0).
inline double extended_sample_cost(const SampleSet& set, int s, int u,
                                   const std::vector<double>& p) {
  detail::check_user_index(u, set.num_users);
  if (static_cast<int>(p.size()) != set.num_users) throw ArgumentError("power dimension mismatch");
  for (double x : p) {
    if (!(x >= 0.0)) throw ArgumentError("extended cost requires nonnegative powers");
  }
  const detail::SampleGains g = detail::compute_sample_gains(set, s);
  double interference = 0.0;
  for (int k = 0; k < set.num_users; ++k) {
    if (k != u) interference += p[k] * g(u, k);
  }
  if (p[u] == 0.0) return (interference + set.noise_power) / g(u, u);
  const double sinr = p[u] * g(u, u) / (interference + set.noise_power);
  return p[u] / std::log1p(sinr);
}

}  // namespace mmpc
