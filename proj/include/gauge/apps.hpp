#pragma once

#include "gauge/dual.hpp"
#include "gauge/eig.hpp"
#include "gauge/opcore.hpp"

namespace gauge {

enum class MaskKind { gaussian, octanary };

/// Coded-diffraction masks: L diagonals of length n. Gaussian masks have
/// i.i.d. standard complex normal entries; octanary entries are d = d1 d2
/// with d1 uniform on {1, -1, i, -i} and d2 = sqrt(2)/2 w.p. 4/5, sqrt(3)
/// w.p. 1/5 (the usual coded-diffraction convention).
std::vector<CVec> pr_make_masks(Eigen::Index n, Eigen::Index L, MaskKind kind,
                                std::uint64_t seed);

struct PhaseRetrievalSpec {
  Eigen::Index n = 0;
  Eigen::Index L = 0;
  MaskKind mask_kind = MaskKind::octanary;
  std::uint64_t seed = 0;
  std::vector<CVec> masks;  // filled by make() when left empty

  static PhaseRetrievalSpec make(Eigen::Index n, Eigen::Index L, MaskKind kind,
                                 std::uint64_t seed);
  void validate() const;
};

/// PhaseLift coded-diffraction map, m = nL:
///   A(x x^*)_(k,t) = |(F C_k x)_t|^2,   A^* y = sum_k C_k^* F^* Diag(y_k) F C_k
/// with F the unitary DFT. Forward costs L DFTs per factor column, the
/// adjoint action 2L DFTs.
class PhaseRetrievalMap : public MeasurementMap {
 public:
  explicit PhaseRetrievalMap(PhaseRetrievalSpec spec);

  const PhaseRetrievalSpec& spec() const { return spec_; }

 protected:
  RVec do_forward(const CMat& Z) const override;
  CVec do_adjoint(const RVec& y, const CVec& v) const override;

 private:
  PhaseRetrievalSpec spec_;
};

std::shared_ptr<const PhaseRetrievalMap> pr_make_operator(PhaseRetrievalSpec spec);

struct BlindDeconvSpec {
  Eigen::Index m = 0;   // measurement length, power of two
  Eigen::Index n1 = 0;  // leading Haar coefficients kept by B1
  Eigen::Index n2 = 0;  // leading coordinates kept by B2
  std::uint64_t seed = 0;

  void validate() const;
};

/// Blind deconvolution as a rectangular map on X = x1 x2^*:
///   A(X) = F^{-1} diag((F B1) X (conj(F) B2)^*)
/// so that rank-one forwards are circular convolutions B1 x1 (*) B2 conj(x2)
/// under the raw (unnormalized) DFT. B1 synthesizes the first n1 Haar
/// coefficients, B2 pads the first n2 coordinates. Every FFT and wavelet
/// transform is counted.
class BlindDeconvMap : public AsymmetricMap {
 public:
  explicit BlindDeconvMap(BlindDeconvSpec spec);

  const BlindDeconvSpec& spec() const { return spec_; }

  /// B1 z: zero-pad the n1 coefficients and run Haar synthesis (one DWT).
  CVec apply_b1(const CVec& z) const;
  /// B1^* w: Haar analysis, keep the first n1 coefficients (one DWT).
  CVec apply_b1_h(const CVec& w) const;

 protected:
  CVec do_forward(const CMat& Z1, const CMat& Z2) const override;
  CVec do_adjoint(const CVec& y, const CVec& v) const override;
  CVec do_adjoint_h(const CVec& y, const CVec& u) const override;

 private:
  BlindDeconvSpec spec_;
};

std::shared_ptr<const BlindDeconvMap> bd_make_operator(BlindDeconvSpec spec);

/// Weight C for reweighted trace minimization, kept implicit:
///   C^{-1} = delta I + Z Z^*,
/// so C-half-factor actions cost one n x r multiply. `factor` exposes
/// R^{-1} = (delta I + Z Z^*)^{1/2} actions with C = R R^* for the
/// generalized eigenvalue solve; `apply_c` applies C itself.
struct WeightedSpec {
  double delta = 0.0;
  WeightFactor factor;
  std::function<CVec(const CVec&)> apply_c;
};

WeightedSpec reweight(const CMat& Zhat, double delta);

/// Weighted trace dual objective lambda_1(A^* y, C) with generalized
/// eigenvectors (u^* C u = 1) for recovery.
DualObjective weighted_trace_dual(const DualProblem& prob, const WeightFactor& weight,
                                  const RVec& y, const EigRequest& req = {});

/// Dense-weight convenience overload (C Hermitian positive definite).
DualObjective weighted_trace_dual(const DualProblem& prob, const CMat& C,
                                  const RVec& y, const EigRequest& req = {});

struct WeightedNuclearResult {
  double value = 0.0;  // sigma_1(C1^{-1} (A^* y) C2^{-*})
  CMat U, V;           // top singular subspaces of the weighted operator
  EigResult eig;       // spectrum of the Hermitian embedding
};

/// Weighted nuclear-norm dual objective sigma_1(C1^{-1} (A^* y) C2^{-*}),
/// computed as the rightmost eigenvalue of the Hermitian embedding of the
/// weighted map. C1, C2 must be invertible.
WeightedNuclearResult weighted_nuclear_dual(const AsymmetricMap& amap, const CMat& C1,
                                            const CMat& C2, const CVec& y,
                                            const EigRequest& req = {});

}  // namespace gauge
