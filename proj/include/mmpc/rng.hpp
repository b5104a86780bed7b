#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace mmpc {

// Counter-based substream RNG. Every (seed, stream) pair yields an
// independent deterministic sequence, so Monte Carlo samples can be
// generated in parallel in any order with identical results.
class SubstreamRng {
public:
  SubstreamRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream + 0xbf58476d1ce4e5b9ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1], safe as a log argument.
  double next_open_double() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller; hand-rolled so results do not depend
  // on the standard library's distribution implementation.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_open_double()));
    const double theta = 2.0 * M_PI * next_double();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Circularly symmetric complex normal with unit variance (CN(0,1)).
  std::complex<double> next_cnormal() {
    const double scale = 1.0 / std::sqrt(2.0);
    const double re = next_normal();
    const double im = next_normal();
    return {scale * re, scale * im};
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mmpc
