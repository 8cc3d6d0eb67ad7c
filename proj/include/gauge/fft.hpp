#pragma once

#include "gauge/types.hpp"

namespace gauge {

/// Unitary DFT: y = F x with F = DFT / sqrt(n).
CVec unitary_dft(const CVec& x);

/// Unitary inverse DFT: y = F^* x.
CVec unitary_idft(const CVec& x);

/// Raw DFT (no normalization), the convolution-theorem convention.
CVec raw_dft(const CVec& x);

/// Raw inverse DFT (1/n normalization), so raw_idft(raw_dft(x)) == x.
CVec raw_idft(const CVec& x);

/// Orthonormal Haar wavelet analysis (forward DWT). Length must be a
/// power of two.
CVec haar_analysis(const CVec& x);

/// Orthonormal Haar synthesis (inverse DWT).
CVec haar_synthesis(const CVec& x);

bool is_pow2(Eigen::Index n);

}  // namespace gauge
