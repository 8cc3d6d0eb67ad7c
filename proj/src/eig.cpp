#include "gauge/eig.hpp"

#include "gauge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace gauge {

namespace {

CVec checked_apply(const ApplyFn& apply, const CVec& v) {
  CVec w = apply(v);
  require(w.size() == v.size(), "eig: operator changed vector size");
  if (!w.allFinite()) throw numeric_error("eig: operator produced NaN/Inf");
  return w;
}

// Random unit vector orthogonal to the first `cols` columns of V.
CVec fresh_direction(const CMat& V, Eigen::Index cols, Rng& rng) {
  const Eigen::Index n = V.rows();
  for (int attempt = 0; attempt < 64; ++attempt) {
    CVec v = rng.cnormal_vec(n);
    if (cols > 0) {
      v -= V.leftCols(cols) * (V.leftCols(cols).adjoint() * v).eval();
      v -= V.leftCols(cols) * (V.leftCols(cols).adjoint() * v).eval();
    }
    const double nrm = v.norm();
    if (nrm > 1e-8 * std::sqrt(static_cast<double>(n))) return v / nrm;
  }
  throw numeric_error("eig: unable to generate an orthogonal restart vector");
}

int multiplicity_estimate(const RVec& values, int k) {
  const double lam1 = values[0];
  const double gap = kMultiplicityGap * std::max(1.0, std::abs(lam1));
  int r1 = 1;
  while (r1 < k && lam1 - values[r1] <= gap) ++r1;
  return r1;
}

}  // namespace

EigResult rightmost_eigpairs(const ApplyFn& apply, Eigen::Index n,
                             const EigRequest& req) {
  require(n >= 1, "eig: dimension must be positive");
  const int k = static_cast<int>(std::min<Eigen::Index>(std::max(req.k, 1), n));
  require(req.tol > 0, "eig: tolerance must be positive");

  EigResult res;

  if (n == 1) {
    const CVec one = CVec::Ones(1);
    const CVec w = checked_apply(apply, one);
    res.values = RVec::Constant(1, w[0].real());
    res.vectors = CMat::Ones(1, 1);
    res.residuals = RVec::Zero(1);
    res.converged = {true};
    res.r1 = 1;
    res.iterations = 1;
    return res;
  }

  int md = req.subspace_dim > 0 ? req.subspace_dim : std::max(2 * k + 8, 20);
  md = static_cast<int>(std::min<Eigen::Index>(md, n));
  require(md >= k, "eig: subspace_dim must be at least k");

  Rng rng(req.seed);
  CMat V(n, md);
  RMat T = RMat::Zero(md, md);
  int applies = 0;

  // Starting vector.
  CVec v0;
  if (req.warm_start && req.warm_start->size() == n && req.warm_start->norm() > 0) {
    v0 = req.warm_start->normalized();
  } else {
    v0 = rng.cnormal_vec(n).normalized();
  }
  V.col(0) = v0;

  int locked = 0;           // columns of V holding compressed Ritz vectors
  double beta_last = 0.0;   // final off-diagonal coupling of the last cycle
  RVec ritz_vals;
  RMat ritz_vecs;
  const int keep = std::min(md - 2 > 0 ? md - 2 : md - 1, std::max(k + 3, 2 * k));

  bool have_continuation = false;
  CVec continuation;

  auto run_cycle = [&](int start) {
    CVec w;
    for (int j = start; j < md; ++j) {
      w = checked_apply(apply, V.col(j));
      ++applies;
      const double alpha = std::real(V.col(j).dot(w));
      T(j, j) = alpha;
      // Full reorthogonalization, applied twice.
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w).eval();
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w).eval();
      double beta = w.norm();
      const double scale = std::max(1.0, std::abs(alpha));
      if (beta <= 1e-13 * scale) {
        // Invariant subspace found; continue in a fresh direction.
        beta = 0.0;
        if (j + 1 < md) w = fresh_direction(V, j + 1, rng);
      } else {
        w /= beta;
      }
      if (j + 1 < md) {
        T(j, j + 1) = T(j + 1, j) = beta;
        V.col(j + 1) = w;
      } else {
        beta_last = beta;
        have_continuation = beta > 0.0;
        if (have_continuation) continuation = w;
      }
    }
  };

  for (int cycle = 0; cycle <= req.max_restarts; ++cycle) {
    run_cycle(locked);

    Eigen::SelfAdjointEigenSolver<RMat> es(T);
    require(es.info() == Eigen::Success, "eig: projected eigensolve failed");
    // Ascending order from Eigen; reverse for descending.
    ritz_vals = es.eigenvalues().reverse();
    ritz_vecs = es.eigenvectors().rowwise().reverse();

    const double lam_scale = std::max(1.0, std::abs(ritz_vals[0]));
    bool done = true;
    for (int i = 0; i < k; ++i) {
      const double rest = std::abs(beta_last * ritz_vecs(md - 1, i));
      if (rest > req.tol * lam_scale) {
        done = false;
        break;
      }
    }
    if (done || cycle == req.max_restarts || md == static_cast<int>(n)) break;

    // Thick restart: compress the leading Ritz vectors.
    const int l = keep;
    CMat Vnew = V * ritz_vecs.leftCols(l).cast<Complex>();
    RMat Tnew = RMat::Zero(md, md);
    for (int i = 0; i < l; ++i) {
      Tnew(i, i) = ritz_vals[i];
      const double s = beta_last * ritz_vecs(md - 1, i);
      Tnew(i, l) = Tnew(l, i) = s;
    }
    V.leftCols(l) = Vnew;
    if (have_continuation) {
      V.col(l) = continuation;
    } else {
      V.col(l) = fresh_direction(V, l, rng);
    }
    T = Tnew;
    locked = l;
  }

  // Assemble the leading k Ritz pairs and their true residuals.
  res.values = ritz_vals.head(k);
  res.vectors = V.leftCols(md) * ritz_vecs.leftCols(k).cast<Complex>();
  res.residuals.resize(k);
  res.converged.assign(k, false);
  const double lam_scale = std::max(1.0, std::abs(res.values[0]));
  for (int i = 0; i < k; ++i) {
    res.vectors.col(i).normalize();
    const CVec Av = checked_apply(apply, res.vectors.col(i));
    ++applies;
    res.residuals[i] = (Av - res.values[i] * res.vectors.col(i)).norm();
    res.converged[i] = res.residuals[i] <= req.tol * lam_scale;
  }
  res.r1 = multiplicity_estimate(res.values, k);
  res.iterations = applies;
  return res;
}

WeightFactor dense_weight_factor(const CMat& C) {
  auto llt = std::make_shared<Eigen::LLT<CMat>>(C);
  if (llt->info() != Eigen::Success)
    throw numeric_error("weight factorization failed: C is not positive definite");
  WeightFactor w;
  w.apply_rinv = [llt](const CVec& v) -> CVec {
    return llt->matrixL().solve(v);
  };
  w.apply_rinv_h = [llt](const CVec& v) -> CVec {
    return llt->matrixL().adjoint().solve(v);
  };
  return w;
}

EigResult generalized_rightmost(const ApplyFn& apply_a, const WeightFactor& weight,
                                Eigen::Index n, const EigRequest& req) {
  require(weight.apply_rinv && weight.apply_rinv_h, "generalized eig: missing factor");
  ApplyFn transformed = [&](const CVec& v) -> CVec {
    return weight.apply_rinv(apply_a(weight.apply_rinv_h(v)));
  };
  EigRequest treq = req;
  if (treq.warm_start) {
    // Warm starts are expressed in the generalized coordinates; map them
    // back to the transformed operator's coordinates (u_hat = R^* u up to
    // normalization, approximated by the inverse back-transform).
    treq.warm_start.reset();
  }
  EigResult res = rightmost_eigpairs(transformed, n, treq);
  for (Eigen::Index j = 0; j < res.vectors.cols(); ++j)
    res.vectors.col(j) = weight.apply_rinv_h(res.vectors.col(j));
  return res;
}

}  // namespace gauge
