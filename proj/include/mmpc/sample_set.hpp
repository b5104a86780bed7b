#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"

namespace mmpc {

using Complex = std::complex<double>;

// S paired realizations of aggregated channels and unit-norm beamformers for
// all N users. Expectations in the rate utilities are taken over this
// empirical distribution. Immutable after assembly.
struct SampleSet {
  int sample_count = 0;  // S
  int num_users = 0;     // N
  int dimension = 0;     // K = L*M aggregated antennas
  double noise_power = 0.0;  // sigma^2, mW

  // Layout: index ((s*N + u)*K + k), sample-major, user-major, antenna-minor.
  std::vector<Complex> channels;
  std::vector<Complex> beamformers;

  const Complex* channel(int s, int u) const {
    return channels.data() + (static_cast<std::size_t>(s) * num_users + u) * dimension;
  }
  const Complex* beamformer(int s, int u) const {
    return beamformers.data() + (static_cast<std::size_t>(s) * num_users + u) * dimension;
  }

  void validate() const {
    if (sample_count < 1) throw ArgumentError("SampleSet: S must be >= 1");
    if (num_users < 1 || dimension < 1) throw ArgumentError("SampleSet: N and K must be >= 1");
    if (!(noise_power > 0.0)) throw ArgumentError("SampleSet: noise power must be positive");
    const std::size_t expected =
        static_cast<std::size_t>(sample_count) * num_users * dimension;
    if (channels.size() != expected || beamformers.size() != expected) {
      throw ArgumentError("SampleSet: storage size does not match S*N*K");
    }
    for (const Complex& c : channels) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw ArgumentError("SampleSet: non-finite channel entry");
      }
    }
    for (int s = 0; s < sample_count; ++s) {
      for (int u = 0; u < num_users; ++u) {
        const Complex* v = beamformer(s, u);
        double nrm2 = 0.0;
        for (int k = 0; k < dimension; ++k) nrm2 += std::norm(v[k]);
        if (std::abs(std::sqrt(nrm2) - 1.0) > 1e-12) {
          throw ArgumentError("SampleSet: beamformer of user " + std::to_string(u) +
                              " in sample " + std::to_string(s) + " is not unit norm");
        }
      }
    }
    for (int u = 0; u < num_users; ++u) {
      bool has_signal = false;
      for (int s = 0; s < sample_count && !has_signal; ++s) {
        Complex inner = 0.0;
        const Complex* h = channel(s, u);
        const Complex* v = beamformer(s, u);
        for (int k = 0; k < dimension; ++k) inner += std::conj(v[k]) * h[k];
        has_signal = std::abs(inner) > 0.0;
      }
      if (!has_signal) {
        throw DegenerateUserError(
            u, "user " + std::to_string(u) + " has zero effective channel in all samples");
      }
    }
  }
};

}  // namespace mmpc
