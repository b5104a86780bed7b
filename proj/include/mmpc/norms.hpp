#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"

namespace mmpc {

// Strictly positive per-user transmit powers (mW).
using PowerVector = std::vector<double>;

inline void check_strictly_positive(std::span<const double> v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ArgumentError(std::string(name) + "[" + std::to_string(i) +
                          "] must be strictly positive and finite");
    }
  }
}

enum class NormKind { L1, L2, LInf, WeightedLInf };

// A monotone norm on the nonnegative cone: x <= y implies ||x|| <= ||y||.
struct MonotoneNormSpec {
  NormKind kind = NormKind::LInf;
  std::vector<double> weights;  // only for WeightedLInf

  static MonotoneNormSpec l1() { return {NormKind::L1, {}}; }
  static MonotoneNormSpec l2() { return {NormKind::L2, {}}; }
  static MonotoneNormSpec linf() { return {NormKind::LInf, {}}; }
  static MonotoneNormSpec weighted_linf(std::vector<double> w) {
    check_strictly_positive(w, "weights");
    return {NormKind::WeightedLInf, std::move(w)};
  }
};

inline double norm_value(const MonotoneNormSpec& norm, std::span<const double> v) {
  switch (norm.kind) {
    case NormKind::L1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormKind::L2: {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    }
    case NormKind::LInf: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    case NormKind::WeightedLInf: {
      if (norm.weights.size() != v.size()) {
        throw ArgumentError("weighted norm: weights dimension " +
                            std::to_string(norm.weights.size()) + " != vector dimension " +
                            std::to_string(v.size()));
      }
      double m = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, norm.weights[i] * std::abs(v[i]));
      return m;
    }
  }
  throw ArgumentError("unknown norm kind");
}

inline double norm_value(const MonotoneNormSpec& norm, const std::vector<double>& v) {
  return norm_value(norm, std::span<const double>(v));
}

// d(p, q) = max_u |ln(p_u / q_u)| on the positive cone.
inline double thompson_metric(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("thompson_metric: dimension mismatch");
  check_strictly_positive(p, "p");
  check_strictly_positive(q, "q");
  double d = 0.0;
  // log(p) - log(q) rather than log(p / q): exactly symmetric in p and q.
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, std::abs(std::log(p[i]) - std::log(q[i])));
  }
  return d;
}

inline double thompson_metric(const std::vector<double>& p, const std::vector<double>& q) {
  return thompson_metric(std::span<const double>(p), std::span<const double>(q));
}

}  // namespace mmpc
