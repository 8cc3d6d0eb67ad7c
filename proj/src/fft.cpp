#include "gauge/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace gauge {

namespace {

Eigen::FFT<double>& plan() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

CVec raw_dft(const CVec& x) {
  CVec y(x.size());
  plan().fwd(y, x);
  return y;
}

CVec raw_idft(const CVec& x) {
  CVec y(x.size());
  plan().inv(y, x);
  return y;
}

CVec unitary_dft(const CVec& x) {
  return raw_dft(x) / std::sqrt(static_cast<double>(x.size()));
}

CVec unitary_idft(const CVec& x) {
  return raw_idft(x) * std::sqrt(static_cast<double>(x.size()));
}

bool is_pow2(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

CVec haar_analysis(const CVec& x) {
  require(is_pow2(x.size()), "haar: length must be a power of two");
  CVec a = x;
  CVec tmp(x.size());
  for (Eigen::Index len = x.size(); len > 1; len /= 2) {
    const Eigen::Index half = len / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
      tmp[i] = (a[2 * i] + a[2 * i + 1]) * M_SQRT1_2;
      tmp[half + i] = (a[2 * i] - a[2 * i + 1]) * M_SQRT1_2;
    }
    a.head(len) = tmp.head(len);
  }
  return a;
}

CVec haar_synthesis(const CVec& x) {
  require(is_pow2(x.size()), "haar: length must be a power of two");
  CVec a = x;
  CVec tmp(x.size());
  for (Eigen::Index len = 2; len <= x.size(); len *= 2) {
    const Eigen::Index half = len / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
      tmp[2 * i] = (a[i] + a[half + i]) * M_SQRT1_2;
      tmp[2 * i + 1] = (a[i] - a[half + i]) * M_SQRT1_2;
    }
    a.head(len) = tmp.head(len);
  }
  return a;
}

}  // namespace gauge
