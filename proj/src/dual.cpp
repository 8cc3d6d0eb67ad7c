#include "gauge/dual.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gauge {

namespace {

// Hermitian square root of a PSD matrix, clipping tiny negative eigenvalues.
CMat psd_sqrt(const CMat& T) {
  Eigen::SelfAdjointEigenSolver<CMat> es(T);
  RVec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

RVec halfspace_projection(const RVec& b, const RVec& y) {
  const double c = b.dot(y);
  if (c >= 1.0) return y;
  return y + ((1.0 - c) / b.squaredNorm()) * b;
}

// Candidate projection for a given KKT multiplier mu >= 0:
//   y* = (y + mu b) t / (t + mu eps), t = ||y + mu b|| - mu eps.
// Returns false when the formula degenerates (t <= 0).
bool point_for_multiplier(const RVec& b, double eps, const RVec& y, double mu,
                          RVec& out) {
  const RVec w = y + mu * b;
  const double s = w.norm();
  const double t = s - mu * eps;
  if (t <= 0.0 || s == 0.0) return false;
  out = w * (t / s);
  return true;
}

RVec ball_projection(const RVec& b, double eps, const RVec& y) {
  const double B = b.squaredNorm();
  const double beta = b.dot(y);
  const double Y = y.squaredNorm();

  // Eliminating the KKT system to the norm t = ||y*|| yields the quartic
  //   t^2 (t B - eps beta)^2 = Y D^2 + 2 beta N D + B N^2,
  // with D(t) = (B - eps^2) t - eps and N(t) = eps t^2 + (1 - beta) t,
  // and multiplier mu = N(t) / D(t).
  auto mul = [](const std::array<double, 5>& p, const std::array<double, 5>& q) {
    std::array<double, 5> r{};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; i + j < 5; ++j) r[i + j] += p[i] * q[j];
    return r;
  };
  const std::array<double, 5> D{-eps, B - eps * eps, 0, 0, 0};
  const std::array<double, 5> N{0, 1.0 - beta, eps, 0, 0};
  // lhs: [t (tB - eps beta)]^2 = (B t^2 - eps beta t)^2
  const std::array<double, 5> lin{0, -eps * beta, B, 0, 0};
  std::array<double, 5> P = mul(lin, lin);
  const auto DD = mul(D, D);
  const auto ND = mul(N, D);
  const auto NN = mul(N, N);
  for (int i = 0; i < 5; ++i) P[i] -= Y * DD[i] + 2.0 * beta * ND[i] + B * NN[i];

  std::vector<RVec> candidates;
  if (std::abs(P[4]) > 0.0) {
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 3; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < 4; ++i) comp(i, 3) = -P[i] / P[4];
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp);
    for (int i = 0; i < 4; ++i) {
      const auto root = es.eigenvalues()[i];
      if (std::abs(root.imag()) > 1e-8 * std::max(1.0, std::abs(root.real())))
        continue;
      const double t = root.real();
      if (t <= 0.0) continue;
      const double Dv = (B - eps * eps) * t - eps;
      if (std::abs(Dv) < 1e-14) continue;
      const double mu = (eps * t * t + (1.0 - beta) * t) / Dv;
      if (mu < 0.0) continue;
      RVec cand;
      if (!point_for_multiplier(b, eps, y, mu, cand)) continue;
      if (std::abs(dual_constraint_value(b, eps, cand) - 1.0) >
          1e-6 * std::max(1.0, cand.norm()))
        continue;
      candidates.push_back(std::move(cand));
    }
  }

  if (candidates.empty()) {
    // Safeguard: bisection on the multiplier. The constraint value of the
    // candidate point is increasing in mu and positive for large mu since
    // ||b|| > eps.
    double lo = 0.0, hi = 1.0;
    RVec cand;
    auto value = [&](double mu) {
      if (!point_for_multiplier(b, eps, y, mu, cand)) return -1e300;
      return dual_constraint_value(b, eps, cand) - 1.0;
    };
    int guard = 0;
    while (value(hi) < 0.0 && guard++ < 200) hi *= 2.0;
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (lo + hi);
      (value(mid) < 0.0 ? lo : hi) = mid;
    }
    value(hi);
    candidates.push_back(cand);
  }

  // Minimum-distance candidate.
  const RVec* best = &candidates.front();
  double best_d = (candidates.front() - y).squaredNorm();
  for (const auto& c : candidates) {
    const double d = (c - y).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = &c;
    }
  }
  return *best;
}

// Restores exact feasibility after roundoff; scaling by 1/c maps the
// constraint value c to 1.
RVec snap_feasible(const RVec& b, double eps, RVec y) {
  const double c = dual_constraint_value(b, eps, y);
  if (c < 1.0 && c > 0.0) y /= c;
  return y;
}

}  // namespace

DualObjective dual_objective(const DualProblem& prob, const RVec& y,
                             const EigRequest& req) {
  prob.validate();
  require(y.size() == prob.map->m(), "dual_objective: y has wrong size");
  ApplyFn apply = [&](const CVec& v) { return prob.map->adjoint_apply(y, v); };
  DualObjective out;
  out.eig = rightmost_eigpairs(apply, prob.map->n(), req);
  out.f = out.eig.values[0];
  return out;
}

RVec subgradient(const DualProblem& prob, const EigResult& eig, const CMat& T) {
  const int r1 = eig.r1;
  require(T.rows() == r1 && T.cols() == r1, "subgradient: T must be r1 x r1");
  require(std::abs(T.trace().real() - 1.0) <= 1e-12 &&
              std::abs(T.trace().imag()) <= 1e-12,
          "subgradient: T must have unit trace");
  const CMat W = eig.vectors.leftCols(r1) * psd_sqrt(T);
  return prob.map->forward_factored(W);
}

RVec subgradient(const DualProblem& prob, const EigResult& eig) {
  CMat T = CMat::Zero(eig.r1, eig.r1);
  T(0, 0) = 1.0;
  return subgradient(prob, eig, T);
}

RVec project_feasible(const RVec& b, double eps, const RVec& y) {
  require(b.size() == y.size(), "project_feasible: size mismatch");
  require(eps >= 0.0 && eps < b.norm(), "project_feasible: requires 0 <= eps < ||b||");
  if (dual_constraint_value(b, eps, y) >= 1.0) return y;
  if (eps == 0.0) return halfspace_projection(b, y);
  return ball_projection(b, eps, y);
}

DualState initial_state(const DualProblem& prob, std::optional<RVec> y0,
                        const EigRequest& req) {
  prob.validate();
  DualState st;
  if (y0) {
    st.y = snap_feasible(prob.b, prob.eps, project_feasible(prob.b, prob.eps, *y0));
  } else {
    const double nb = prob.b.norm();
    st.y = prob.b / (nb * nb - prob.eps * nb);
  }
  auto obj = dual_objective(prob, st.y, req);
  st.f = obj.f;
  st.eig = std::move(obj.eig);
  st.g = subgradient(prob, st.eig);
  st.alpha0 = st.g.norm() > 0 ? 1.0 / st.g.norm() : 1.0;
  st.k = 0;
  st.f_memory.push_back(st.f);
  st.y_best = st.y;
  st.f_best = st.f;
  st.eig_best = st.eig;
  return st;
}

void descend_step(const DualProblem& prob, DualState& state, const StepOpts& opts,
                  const EigRequest& req) {
  if (!std::isfinite(state.f)) throw numeric_error("descend_step: NaN objective");
  state.k += 1;

  EigRequest ereq = req;
  ereq.warm_start = state.eig.vectors.col(0);

  const bool isolated = state.eig.r1 == 1 && state.eig.top_converged();

  double alpha = state.alpha0 / state.k;
  if (isolated && state.have_prev) {
    const RVec dy = state.y - state.y_prev;
    const RVec dg = state.g - state.g_prev;
    const double denom = dy.dot(dg);
    if (denom > 1e-16 * dy.norm() * dg.norm())
      alpha = dy.squaredNorm() / denom;
  }

  RVec y_new;
  DualObjective obj_new;
  if (isolated) {
    const double f_ref = *std::max_element(state.f_memory.begin(), state.f_memory.end());
    // Linesearch steps are never allowed below the guaranteed schedule:
    // a stalled spectral steplength (tiny BB alpha accepted forever near a
    // weakly separated eigenvalue) would otherwise freeze the iterates.
    const double alpha_floor = state.alpha0 / state.k;
    int bt = 0;
    for (;; ++bt) {
      y_new = snap_feasible(prob.b, prob.eps,
                            project_feasible(prob.b, prob.eps, state.y - alpha * state.g));
      obj_new = dual_objective(prob, y_new, ereq);
      // Sufficient decrease is measured against the realized (projected)
      // movement: when the constraint is active the projection absorbs most
      // of the raw step, and a test based on alpha * ||g||^2 would reject
      // every steplength.
      const double move2 = (y_new - state.y).squaredNorm();
      if (obj_new.f <= f_ref - opts.suff_decrease / alpha * move2) break;
      if (bt >= opts.max_backtracks || alpha * opts.backtrack < alpha_floor) {
        // Linesearch exhausted; fall back to the guaranteed schedule.
        alpha = state.alpha0 / state.k;
        y_new = snap_feasible(
            prob.b, prob.eps,
            project_feasible(prob.b, prob.eps, state.y - alpha * state.g));
        obj_new = dual_objective(prob, y_new, ereq);
        break;
      }
      alpha *= opts.backtrack;
    }
  } else {
    y_new = snap_feasible(prob.b, prob.eps,
                          project_feasible(prob.b, prob.eps, state.y - alpha * state.g));
    obj_new = dual_objective(prob, y_new, ereq);
  }

  state.y_prev = state.y;
  state.g_prev = state.g;
  state.have_prev = true;
  state.y = std::move(y_new);
  state.f = obj_new.f;
  state.eig = std::move(obj_new.eig);
  state.g = subgradient(prob, state.eig);
  state.f_memory.push_back(state.f);
  while (static_cast<int>(state.f_memory.size()) > opts.nonmonotone_memory)
    state.f_memory.pop_front();
  if (state.f < state.f_best) {
    state.f_best = state.f;
    state.y_best = state.y;
    state.eig_best = state.eig;
  }
  if (!std::isfinite(state.f)) throw numeric_error("descend_step: NaN objective");
}

GapResult weak_duality_gap(const DualProblem& prob, const CMat& Z, const RVec& y,
                           const EigRequest& req) {
  GapResult res;
  const double trace_x = Z.squaredNorm();
  const auto obj = dual_objective(prob, y, req);
  res.gap = weak_duality_gap(trace_x, obj.f);
  const double resid = (prob.map->forward_factored(Z) - prob.b).norm();
  res.primal_feasible = resid <= prob.eps + 1e-8 * std::max(1.0, prob.b.norm());
  res.dual_feasible = dual_constraint_value(prob.b, prob.eps, y) >= 1.0 - 1e-10;
  return res;
}

bool infeasibility_certificate(const DualProblem& prob, const RVec& y, double f,
                               double tol) {
  require(dual_constraint_value(prob.b, prob.eps, y) >= 1.0 - 1e-9,
          "infeasibility_certificate: y must be dual feasible");
  return f <= tol;
}

}  // namespace gauge
