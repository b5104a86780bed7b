#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"
#include "mmpc/sample_set.hpp"

namespace mmpc {

// Sample-cache file: little-endian header {magic "PCSS", version u32, S u32,
// N u32, K u32, sigma^2 f64}, then S*N*K channel (re, im) f64 pairs in
// sample-major, user-major, antenna-minor order, then beamformers likewise.
inline constexpr char kCacheMagic[4] = {'P', 'C', 'S', 'S'};
inline constexpr std::uint32_t kCacheVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "sample cache I/O assumes a little-endian host");

namespace detail {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value, const char* what) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CacheError(std::string("truncated cache file while reading ") + what);
}

inline void write_complex_block(std::ostream& out, const std::vector<Complex>& block) {
  for (const Complex& c : block) {
    const double re = c.real();
    const double im = c.imag();
    write_raw(out, re);
    write_raw(out, im);
  }
}

inline void read_complex_block(std::istream& in, std::vector<Complex>& block, const char* what) {
  for (Complex& c : block) {
    double re, im;
    read_raw(in, re, what);
    read_raw(in, im, what);
    c = Complex(re, im);
  }
}

}  // namespace detail

inline void write_sample_cache(const SampleSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CacheError("cannot open '" + path + "' for writing");

  out.write(kCacheMagic, 4);
  detail::write_raw(out, kCacheVersion);
  detail::write_raw(out, static_cast<std::uint32_t>(set.sample_count));
  detail::write_raw(out, static_cast<std::uint32_t>(set.num_users));
  detail::write_raw(out, static_cast<std::uint32_t>(set.dimension));
  detail::write_raw(out, set.noise_power);
  detail::write_complex_block(out, set.channels);
  detail::write_complex_block(out, set.beamformers);
  out.flush();
  if (!out) throw CacheError("write to '" + path + "' failed");
}

inline SampleSet read_sample_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot open '" + path + "' for reading");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw CacheError("'" + path + "' is not a sample cache (bad magic)");
  }
  std::uint32_t version, s, n, k;
  detail::read_raw(in, version, "version");
  if (version != kCacheVersion) {
    throw CacheError("unsupported cache version " + std::to_string(version) + " in '" + path +
                     "' (expected " + std::to_string(kCacheVersion) + ")");
  }
  detail::read_raw(in, s, "sample count");
  detail::read_raw(in, n, "user count");
  detail::read_raw(in, k, "dimension");

  SampleSet set;
  set.sample_count = static_cast<int>(s);
  set.num_users = static_cast<int>(n);
  set.dimension = static_cast<int>(k);
  detail::read_raw(in, set.noise_power, "noise power");

  const std::size_t count = static_cast<std::size_t>(s) * n * k;
  set.channels.resize(count);
  set.beamformers.resize(count);
  detail::read_complex_block(in, set.channels, "channel block");
  detail::read_complex_block(in, set.beamformers, "beamformer block");

  char extra;
  if (in.read(&extra, 1)) throw CacheError("'" + path + "' has trailing bytes");

  try {
    set.validate();
  } catch (const std::exception& e) {
    throw CacheError("cache '" + path + "' violates SampleSet invariants: " + e.what());
  }
  return set;
}

}  // namespace mmpc
