#pragma once

#include "gauge/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace gauge {

/// Hermitian operator action v -> Op v.
using ApplyFn = std::function<CVec(const CVec&)>;

struct EigRequest {
  int k = 2;                    // requested rightmost eigenpairs
  double tol = 1e-8;            // relative residual tolerance
  int max_restarts = 400;
  int subspace_dim = 0;         // 0: max(2k + 8, 20), clipped to n
  std::uint64_t seed = 7;       // starting-vector seed
  std::optional<CVec> warm_start;
};

/// Eigenvalues within this relative gap of lambda_1 count toward the
/// multiplicity estimate r1.
inline constexpr double kMultiplicityGap = 1e-6;

struct EigResult {
  RVec values;                  // descending
  CMat vectors;                 // n x k, orthonormal
  RVec residuals;               // ||Op v - lambda v|| per pair
  std::vector<bool> converged;
  int r1 = 1;                   // multiplicity estimate of values[0]
  int iterations = 0;           // operator applications used

  bool top_converged() const { return !converged.empty() && converged.front(); }
  bool all_converged() const {
    for (bool c : converged)
      if (!c) return false;
    return !converged.empty();
  }
};

/// k algebraically largest eigenpairs of a matrix-free Hermitian operator.
/// Thick-restart Lanczos with full reorthogonalization; deterministic for a
/// fixed seed/warm start. Non-convergence is reported through the flags;
/// NaN in the operator output is a hard error.
EigResult rightmost_eigpairs(const ApplyFn& apply, Eigen::Index n,
                             const EigRequest& req = {});

/// Factor actions for a Hermitian positive definite weight C = R R^*.
struct WeightFactor {
  std::function<CVec(const CVec&)> apply_rinv;    // v -> R^{-1} v
  std::function<CVec(const CVec&)> apply_rinv_h;  // v -> R^{-*} v
};

/// Cholesky-based factor actions for a dense C (throws numeric_error if C
/// is not positive definite).
WeightFactor dense_weight_factor(const CMat& C);

/// Rightmost eigenpairs of the pencil (A, C): eigenvalues of R^{-1} A R^{-*}
/// with back-transformed generalized eigenvectors (A u = lambda C u,
/// u^* C u = 1). Residuals are those of the transformed operator.
EigResult generalized_rightmost(const ApplyFn& apply_a, const WeightFactor& weight,
                                Eigen::Index n, const EigRequest& req = {});

}  // namespace gauge
