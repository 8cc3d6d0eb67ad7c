#pragma once

#include "gauge/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace gauge {

/// Deterministic random source. Distribution sampling is implemented
/// in-house (Box-Muller over raw 64-bit draws) so that a fixed seed
/// produces identical streams on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    // 53 random mantissa bits.
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Standard complex normal, E|z|^2 = 1.
  Complex cnormal() {
    const double re = normal();
    const double im = normal();
    return Complex(re * M_SQRT1_2, im * M_SQRT1_2);
  }

  std::uint64_t bits() { return gen_(); }

  RVec normal_vec(Eigen::Index n) {
    RVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  CVec cnormal_vec(Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cnormal();
    return v;
  }

  CMat cnormal_mat(Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cnormal();
    return m;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gauge
