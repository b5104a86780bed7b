#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "mmpc/errors.hpp"
#include "mmpc/reduction.hpp"
#include "mmpc/rng.hpp"
#include "mmpc/sample_set.hpp"
#include "mmpc/scenario.hpp"

namespace mmpc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Layout {
  std::vector<Point2> ap_positions;    // L points
  std::vector<Point2> user_positions;  // N points
  double area_side = 0.0;
};

// 3-D distance on the torus: minimum-image planar displacement plus the
// AP-user height difference.
inline double toroidal_distance(Point2 x, Point2 y, double side, double delta_h) {
  auto wrap = [side](double d) {
    d = std::abs(d);
    return std::min(d, side - d);
  };
  const double dx = wrap(x.x - y.x);
  const double dy = wrap(x.y - y.y);
  return std::sqrt(dx * dx + dy * dy + delta_h * delta_h);
}

// APs on a regular sqrt(L) x sqrt(L) grid (or uniform at random when
// configured so); users i.i.d. uniform over the square.
inline Layout generate_layout(const ScenarioConfig& config, std::uint64_t seed) {
  Layout layout;
  layout.area_side = config.area_side;
  layout.ap_positions.reserve(config.num_aps);

  if (config.ap_placement == ApPlacement::Grid) {
    const int per_side = static_cast<int>(std::lround(std::sqrt(config.num_aps)));
    if (per_side * per_side != config.num_aps) {
      throw ParseError("grid AP placement requires L to be a perfect square, got L=" +
                       std::to_string(config.num_aps));
    }
    const double pitch = config.area_side / per_side;
    for (int i = 0; i < per_side; ++i) {
      for (int j = 0; j < per_side; ++j) {
        layout.ap_positions.push_back({(i + 0.5) * pitch, (j + 0.5) * pitch});
      }
    }
  } else {
    SubstreamRng rng(seed, 0);
    for (int a = 0; a < config.num_aps; ++a) {
      layout.ap_positions.push_back(
          {rng.next_uniform(0.0, config.area_side), rng.next_uniform(0.0, config.area_side)});
    }
  }

  SubstreamRng rng(seed, 1);
  layout.user_positions.reserve(config.num_users);
  for (int u = 0; u < config.num_users; ++u) {
    layout.user_positions.push_back(
        {rng.next_uniform(0.0, config.area_side), rng.next_uniform(0.0, config.area_side)});
  }
  return layout;
}

// COST-231 Walfish-Ikegami UMi path loss in dB, carrier frequency in MHz,
// distance clamped below at 1 m. Shadow fading is added separately.
inline double path_loss_db(double d3d_m, double fc_hz) {
  const double d = std::max(d3d_m, 1.0);
  return -35.4 + 20.0 * std::log10(fc_hz / 1e6) + 26.0 * std::log10(d);
}

struct LargeScale {
  int num_users = 0;
  int num_aps = 0;
  std::vector<double> beta;       // N x L linear gains, [u*L + a]
  std::vector<double> shadow_db;  // N x L shadow draws
  std::vector<double> distance;   // N x L 3-D distances (m)

  double beta_at(int u, int a) const { return beta[static_cast<std::size_t>(u) * num_aps + a]; }
  double distance_at(int u, int a) const {
    return distance[static_cast<std::size_t>(u) * num_aps + a];
  }
};

inline LargeScale large_scale_realization(const Layout& layout, const ScenarioConfig& config,
                                          std::uint64_t seed) {
  const int n = static_cast<int>(layout.user_positions.size());
  const int l = static_cast<int>(layout.ap_positions.size());
  LargeScale ls;
  ls.num_users = n;
  ls.num_aps = l;
  ls.beta.resize(static_cast<std::size_t>(n) * l);
  ls.shadow_db.resize(static_cast<std::size_t>(n) * l);
  ls.distance.resize(static_cast<std::size_t>(n) * l);

  SubstreamRng rng(seed, 2);
  for (int u = 0; u < n; ++u) {
    for (int a = 0; a < l; ++a) {
      const double d = toroidal_distance(layout.user_positions[u], layout.ap_positions[a],
                                         layout.area_side, config.delta_h);
      const double f = config.sigma_sf_db * rng.next_normal();
      const std::size_t idx = static_cast<std::size_t>(u) * l + a;
      ls.distance[idx] = d;
      ls.shadow_db[idx] = f;
      ls.beta[idx] = std::pow(10.0, -(path_loss_db(d, config.carrier_freq) + f) / 10.0);
    }
  }
  return ls;
}

// Gaussian local-scattering spatial covariance for a uniform linear array.
// Hermitian with unit diagonal, hence trace M.
inline Eigen::MatrixXcd spatial_covariance(double nominal_angle, double angular_spread, int m,
                                           double spacing) {
  Eigen::MatrixXcd r(m, m);
  const double sin_t = std::sin(nominal_angle);
  const double cos_t = std::cos(nominal_angle);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double delta = 2.0 * M_PI * spacing * (i - j);
      const double phase = delta * sin_t;
      const double damp = delta * cos_t * angular_spread;
      r(i, j) = std::exp(-0.5 * damp * damp) *
                std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return r;
}

struct PilotAssignment {
  std::vector<int> pilot_of_user;  // N entries in [0, tau_p)
};

struct ClusterAssignment {
  int num_users = 0;
  int num_aps = 0;
  std::vector<char> serves;  // N x L, [u*L + a]
  int master_overrides = 0;  // master-AP services that bypass per-pilot uniqueness

  bool is_serving(int a, int u) const {
    return serves[static_cast<std::size_t>(u) * num_aps + a] != 0;
  }
};

// Contamination-aware pilot assignment and user-centric clusters. Each user's
// master AP is its strongest link; users beyond the first tau_p take the
// pilot with the least received pilot power at their master AP. An AP serves
// at most one user per pilot (the strongest), except that a master AP always
// serves its user.
inline std::pair<PilotAssignment, ClusterAssignment> assign_pilots_and_clusters(
    const LargeScale& ls, const ScenarioConfig& config) {
  const int n = ls.num_users;
  const int l = ls.num_aps;
  const int tau_p = config.tau_p;

  std::vector<int> master(n);
  std::vector<double> max_beta(n);
  for (int u = 0; u < n; ++u) {
    int best = 0;
    for (int a = 1; a < l; ++a) {
      if (ls.beta_at(u, a) > ls.beta_at(u, best)) best = a;
    }
    master[u] = best;
    max_beta[u] = ls.beta_at(u, best);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return max_beta[a] > max_beta[b]; });

  PilotAssignment pilots;
  pilots.pilot_of_user.assign(n, -1);
  std::vector<std::vector<int>> users_of_pilot(tau_p);
  for (int rank = 0; rank < n; ++rank) {
    const int u = order[rank];
    int t;
    if (rank < tau_p) {
      t = rank;
    } else {
      t = 0;
      double best_power = std::numeric_limits<double>::infinity();
      for (int cand = 0; cand < tau_p; ++cand) {
        double received = 0.0;
        for (int k : users_of_pilot[cand]) received += ls.beta_at(k, master[u]);
        if (received < best_power) {
          best_power = received;
          t = cand;
        }
      }
    }
    pilots.pilot_of_user[u] = t;
    users_of_pilot[t].push_back(u);
  }

  ClusterAssignment clusters;
  clusters.num_users = n;
  clusters.num_aps = l;
  clusters.serves.assign(static_cast<std::size_t>(n) * l, 0);

  if (config.cluster_rule == ClusterRule::All) {
    std::fill(clusters.serves.begin(), clusters.serves.end(), 1);
    return {pilots, clusters};
  }

  for (int a = 0; a < l; ++a) {
    for (int t = 0; t < tau_p; ++t) {
      int best = -1;
      for (int u : users_of_pilot[t]) {
        if (best < 0 || ls.beta_at(u, a) > ls.beta_at(best, a)) best = u;
      }
      if (best >= 0) clusters.serves[static_cast<std::size_t>(best) * l + a] = 1;
    }
  }
  for (int u = 0; u < n; ++u) {
    char& slot = clusters.serves[static_cast<std::size_t>(u) * l + master[u]];
    if (!slot) {
      slot = 1;
      ++clusters.master_overrides;
    }
  }
  return {pilots, clusters};
}

// All per-sample channel data: true channels, MMSE estimates, and the
// normalized per-link covariance (trace M before beta-scaling).
struct ChannelRealizations {
  int sample_count = 0;  // S
  int num_users = 0;     // N
  int num_aps = 0;       // L
  int antennas_per_ap = 0;  // M

  // Aggregated K-vectors, index ((s*N + u)*K + k).
  std::vector<Complex> true_channels;
  std::vector<Complex> estimates;

  // Per (u, a): kappa-weighted normalized covariance, trace M.
  std::vector<Eigen::MatrixXcd> covariance;
  std::vector<double> kappa;  // linear Rician factor; infinity for pure LoS

  int dimension() const { return num_aps * antennas_per_ap; }

  const Complex* channel(int s, int u) const {
    return true_channels.data() +
           (static_cast<std::size_t>(s) * num_users + u) * dimension();
  }
  const Complex* estimate(int s, int u) const {
    return estimates.data() + (static_cast<std::size_t>(s) * num_users + u) * dimension();
  }
  const Eigen::MatrixXcd& covariance_at(int u, int a) const {
    return covariance[static_cast<std::size_t>(u) * num_aps + a];
  }
};

namespace detail {

inline double rician_kappa(const ScenarioConfig& config, double distance_m) {
  switch (config.rician_model) {
    case RicianModel::DistanceBased: {
      const double kappa_db = std::max(13.0 - 0.03 * distance_m, -10.0);
      return std::pow(10.0, kappa_db / 10.0);
    }
    case RicianModel::FixedDb:
      return std::pow(10.0, config.rician_kappa_db / 10.0);
    case RicianModel::Rayleigh:
      return 0.0;
    case RicianModel::PureLos:
      return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

// Minimum-image angle from AP a to user u, consistent with the wrap-around
// distance.
inline double link_angle(const Layout& layout, int u, int a) {
  auto wrap = [side = layout.area_side](double d) {
    if (d > side / 2) d -= side;
    if (d < -side / 2) d += side;
    return d;
  };
  const double dx = wrap(layout.user_positions[u].x - layout.ap_positions[a].x);
  const double dy = wrap(layout.user_positions[u].y - layout.ap_positions[a].y);
  return std::atan2(dy, dx);
}

inline Eigen::VectorXcd steering_vector(double angle, int m, double spacing) {
  Eigen::VectorXcd a(m);
  for (int i = 0; i < m; ++i) {
    const double phase = 2.0 * M_PI * spacing * i * std::sin(angle);
    a(i) = std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

// Hermitian square root with eigenvalues clamped at zero; the covariance can
// be numerically rank-deficient at small angular spread.
inline Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Draws S i.i.d. spatially correlated Rician realizations per link and
// aggregates them into K-vectors per user. Sample s uses its own RNG
// substream, so generation parallelizes without changing results.
inline ChannelRealizations sample_true_channels(const Layout& layout, const LargeScale& ls,
                                                const ScenarioConfig& config,
                                                std::uint64_t seed) {
  const int n = ls.num_users;
  const int l = ls.num_aps;
  const int m = config.antennas_per_ap;
  const int k = l * m;
  const int s_count = config.sample_count;

  ChannelRealizations out;
  out.sample_count = s_count;
  out.num_users = n;
  out.num_aps = l;
  out.antennas_per_ap = m;
  out.true_channels.resize(static_cast<std::size_t>(s_count) * n * k);
  out.covariance.resize(static_cast<std::size_t>(n) * l);
  out.kappa.resize(static_cast<std::size_t>(n) * l);

  const double spread = config.angular_spread_deg * M_PI / 180.0;
  std::vector<Eigen::VectorXcd> steering(static_cast<std::size_t>(n) * l);
  std::vector<Eigen::MatrixXcd> nlos_sqrt(static_cast<std::size_t>(n) * l);

  for (int u = 0; u < n; ++u) {
    for (int a = 0; a < l; ++a) {
      const std::size_t idx = static_cast<std::size_t>(u) * l + a;
      const double angle = detail::link_angle(layout, u, a);
      const double kappa = detail::rician_kappa(config, ls.distance_at(u, a));
      const Eigen::VectorXcd steer = detail::steering_vector(angle, m, config.antenna_spacing);
      const Eigen::MatrixXcd r = spatial_covariance(angle, spread, m, config.antenna_spacing);

      out.kappa[idx] = kappa;
      steering[idx] = steer;
      if (std::isinf(kappa)) {
        out.covariance[idx] = steer * steer.adjoint();  // rank-1, trace M
        nlos_sqrt[idx].setZero(m, m);
      } else {
        const double los_frac = kappa / (1.0 + kappa);
        out.covariance[idx] = los_frac * (steer * steer.adjoint()) + (1.0 - los_frac) * r;
        nlos_sqrt[idx] = detail::hermitian_sqrt(r);
      }
    }
  }

  parallel_for(static_cast<std::size_t>(s_count), global_worker_count(), [&](std::size_t s) {
    SubstreamRng rng(seed, 1000 + s);
    Eigen::VectorXcd w(m);
    for (int u = 0; u < n; ++u) {
      Complex* dest = out.true_channels.data() + (s * n + u) * k;
      for (int a = 0; a < l; ++a) {
        const std::size_t idx = static_cast<std::size_t>(u) * l + a;
        const double beta = ls.beta_at(u, a);
        const double kappa = out.kappa[idx];
        const double phi = rng.next_uniform(0.0, 2.0 * M_PI);
        for (int i = 0; i < m; ++i) w(i) = rng.next_cnormal();

        Eigen::VectorXcd h;
        if (std::isinf(kappa)) {
          h = std::sqrt(beta) * std::complex<double>(std::cos(phi), std::sin(phi)) *
              steering[idx];
        } else {
          const Eigen::VectorXcd los =
              std::sqrt(kappa / (1.0 + kappa)) *
              std::complex<double>(std::cos(phi), std::sin(phi)) * steering[idx];
          const Eigen::VectorXcd nlos =
              std::sqrt(1.0 / (1.0 + kappa)) * (nlos_sqrt[idx] * w);
          h = std::sqrt(beta) * (los + nlos);
        }
        for (int i = 0; i < m; ++i) dest[a * m + i] = h(i);
      }
    }
  });
  return out;
}

// Linear-MMSE pilot-based channel estimation with contamination: users
// sharing a pilot interfere in the observation, and the per-AP estimator
// projects onto each link's full covariance.
inline void mmse_channel_estimates(ChannelRealizations& channels, const PilotAssignment& pilots,
                                   const LargeScale& ls, const ScenarioConfig& config,
                                   std::uint64_t seed) {
  const int n = channels.num_users;
  const int l = channels.num_aps;
  const int m = channels.antennas_per_ap;
  const int k = channels.dimension();
  const int s_count = channels.sample_count;
  const double rho_tau = config.pilot_power_mw * config.tau_p;
  const double sigma2 = config.noise_power_mw();

  if (static_cast<int>(pilots.pilot_of_user.size()) != n) {
    throw ArgumentError("pilot assignment dimension mismatch");
  }

  channels.estimates.assign(static_cast<std::size_t>(s_count) * n * k, Complex(0.0, 0.0));

  // Per (AP, pilot): inverse of the observation covariance Psi, and per user
  // on that pilot the estimation filter sqrt(rho*tau) * C_u * Psi^{-1}.
  std::vector<std::vector<int>> users_of_pilot(config.tau_p);
  for (int u = 0; u < n; ++u) users_of_pilot[pilots.pilot_of_user[u]].push_back(u);

  std::vector<Eigen::MatrixXcd> filters(static_cast<std::size_t>(n) * l);
  for (int a = 0; a < l; ++a) {
    for (int t = 0; t < config.tau_p; ++t) {
      if (users_of_pilot[t].empty()) continue;
      Eigen::MatrixXcd psi = sigma2 * Eigen::MatrixXcd::Identity(m, m);
      for (int u : users_of_pilot[t]) {
        psi += rho_tau * ls.beta_at(u, a) * channels.covariance_at(u, a);
      }
      const Eigen::MatrixXcd psi_inv = psi.ldlt().solve(Eigen::MatrixXcd::Identity(m, m));
      for (int u : users_of_pilot[t]) {
        filters[static_cast<std::size_t>(u) * l + a] =
            std::sqrt(rho_tau) * ls.beta_at(u, a) * channels.covariance_at(u, a) * psi_inv;
      }
    }
  }

  parallel_for(static_cast<std::size_t>(s_count), global_worker_count(), [&](std::size_t s) {
    SubstreamRng rng(seed, 5000000 + s);
    Eigen::VectorXcd y(m), noise(m);
    for (int a = 0; a < l; ++a) {
      for (int t = 0; t < config.tau_p; ++t) {
        if (users_of_pilot[t].empty()) continue;
        for (int i = 0; i < m; ++i) noise(i) = std::sqrt(sigma2) * rng.next_cnormal();
        y = noise;
        for (int u : users_of_pilot[t]) {
          const Complex* h = channels.channel(static_cast<int>(s), u) + a * m;
          for (int i = 0; i < m; ++i) y(i) += std::sqrt(rho_tau) * h[i];
        }
        for (int u : users_of_pilot[t]) {
          const Eigen::VectorXcd est = filters[static_cast<std::size_t>(u) * l + a] * y;
          Complex* dest =
              channels.estimates.data() + (s * n + u) * static_cast<std::size_t>(k) + a * m;
          for (int i = 0; i < m; ++i) dest[i] = est(i);
        }
      }
    }
  });
}

// Per-sample unit-norm beamformers from the channel estimates, masked to the
// user-centric cluster. MMSE uses the fixed weighting q = p_max, independent
// of the transmit power vector.
inline std::vector<Complex> build_beamformers(const ChannelRealizations& channels,
                                              const ClusterAssignment& clusters,
                                              const ScenarioConfig& config) {
  const int n = channels.num_users;
  const int l = channels.num_aps;
  const int m = channels.antennas_per_ap;
  const int k = channels.dimension();
  const int s_count = channels.sample_count;
  const double sigma2 = config.noise_power_mw();
  const double q = config.p_max;

  std::vector<Complex> beams(static_cast<std::size_t>(s_count) * n * k, Complex(0.0, 0.0));
  std::vector<std::string> failures(s_count);

  parallel_for(static_cast<std::size_t>(s_count), global_worker_count(), [&](std::size_t s) {
    Eigen::MatrixXcd estimates(k, n);
    for (int u = 0; u < n; ++u) {
      const Complex* e = channels.estimate(static_cast<int>(s), u);
      for (int i = 0; i < k; ++i) estimates(i, u) = e[i];
    }

    Eigen::MatrixXcd directions;
    if (config.beamformer == BeamformerStrategy::CentralizedMmse) {
      Eigen::MatrixXcd a = sigma2 * Eigen::MatrixXcd::Identity(k, k);
      a.noalias() += q * estimates * estimates.adjoint();
      directions = a.ldlt().solve(estimates);
    } else {
      directions = estimates;
    }

    for (int u = 0; u < n; ++u) {
      Eigen::VectorXcd v = directions.col(u);
      for (int a = 0; a < l; ++a) {
        if (!clusters.is_serving(a, u)) v.segment(a * m, m).setZero();
      }
      const double nrm = v.norm();
      if (!(nrm > 0.0)) {
        failures[s] = "beamformer for user " + std::to_string(u) + " in sample " +
                      std::to_string(s) + " is zero after cluster masking";
        return;
      }
      v /= nrm;
      Complex* dest = beams.data() + (s * n + u) * static_cast<std::size_t>(k);
      for (int i = 0; i < k; ++i) dest[i] = v(i);
    }
  });

  for (const std::string& f : failures) {
    if (!f.empty()) throw DegenerateUserError(-1, f);
  }
  return beams;
}

// Pairs each realization's TRUE channels with the estimate-derived
// beamformers and validates the result.
inline SampleSet assemble_sample_set(const ChannelRealizations& channels,
                                     const std::vector<Complex>& beamformers,
                                     const ScenarioConfig& config) {
  SampleSet set;
  set.sample_count = channels.sample_count;
  set.num_users = channels.num_users;
  set.dimension = channels.dimension();
  set.noise_power = config.noise_power_mw();
  set.channels = channels.true_channels;
  set.beamformers = beamformers;
  set.validate();
  return set;
}

// Full scenario pipeline: layout -> large-scale -> pilots/clusters ->
// channels -> estimates -> beamformers -> SampleSet. One fixed layout; the
// Monte Carlo samples are i.i.d. channel realizations.
inline SampleSet simulate_sample_set(const ScenarioConfig& config) {
  const Layout layout = generate_layout(config, config.seed);
  const LargeScale ls = large_scale_realization(layout, config, config.seed);
  const auto [pilots, clusters] = assign_pilots_and_clusters(ls, config);
  ChannelRealizations channels = sample_true_channels(layout, ls, config, config.seed);
  mmse_channel_estimates(channels, pilots, ls, config, config.seed);
  const std::vector<Complex> beams = build_beamformers(channels, clusters, config);
  return assemble_sample_set(channels, beams, config);
}

}  // namespace mmpc
