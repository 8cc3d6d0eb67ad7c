#include "gauge/recover.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

namespace gauge {

namespace {

CMat psd_project(const CMat& S) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (S + S.adjoint()));
  const RVec d = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

CMat psd_sqrt(const CMat& S) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (S + S.adjoint()));
  const RVec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// A(U S U^*) evaluated through the factored interface.
RVec forward_psd(const MeasurementMap& map, const CMat& U, const CMat& S) {
  return map.forward_factored(U * psd_sqrt(S));
}

// Compressed gradient U^* (A^* r) U.
CMat compressed_adjoint(const MeasurementMap& map, const CMat& U, const RVec& r) {
  CMat AU(U.rows(), U.cols());
  for (Eigen::Index j = 0; j < U.cols(); ++j)
    AU.col(j) = map.adjoint_apply(r, U.col(j));
  return U.adjoint() * AU;
}

double real_inner(const CMat& a, const CMat& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

}  // namespace

RVec residual_target(const DualProblem& prob, const RVec& y) {
  if (prob.eps == 0.0) return prob.b;
  const double ny = y.norm();
  require(ny > 0.0, "residual_target: y must be nonzero when eps > 0");
  return prob.b - (prob.eps / ny) * y;
}

RecoveryResult recover_S(const DualProblem& prob, const EigResult& eig,
                         const RVec& y) {
  prob.validate();
  require(y.norm() > 0.0, "recover_S: y must be nonzero");
  const RVec b_eps = residual_target(prob, y);
  const int r1 = std::min<int>(eig.r1, static_cast<int>(eig.vectors.cols()));

  RecoveryResult out;
  if (r1 == 1) {
    const CVec u1 = eig.vectors.col(0);
    const RVec a = prob.map->forward_factored(u1);
    const double denom = a.squaredNorm();
    double s = 0.0;
    if (denom == 0.0) {
      out.degenerate = true;
    } else {
      s = std::max(0.0, a.dot(b_eps)) / denom;
    }
    out.s_scalar = s;
    out.factor.S = CMat::Constant(1, 1, s);
    out.factor.Z = u1 * std::sqrt(s);
    out.residual = (s * a - b_eps).norm();
    out.factor.origin = FactorOrigin::recovered;
    return out;
  }

  // r1 > 1: projected gradient on the small PSD coefficient matrix.
  const CMat U = eig.vectors.leftCols(r1);
  CMat S = CMat::Zero(r1, r1);
  RVec resid = -b_eps;
  CMat grad = compressed_adjoint(*prob.map, U, resid);
  CMat S_prev, G_prev;
  double phi = 0.5 * resid.squaredNorm();
  const double phi_scale = std::max(1.0, phi);
  for (int it = 0; it < 300; ++it) {
    double alpha;
    if (it == 0) {
      alpha = 1.0 / std::max(grad.norm(), 1e-12);
    } else {
      const CMat dS = S - S_prev;
      const CMat dG = grad - G_prev;
      const double denom = real_inner(dS, dG);
      alpha = denom > 1e-18 ? dS.squaredNorm() / denom
                            : 1.0 / std::max(grad.norm(), 1e-12);
    }
    S_prev = S;
    G_prev = grad;
    // Backtracking to plain decrease; the subproblem is tiny and convex.
    double phi_new = phi;
    CMat S_new;
    RVec resid_new;
    for (int bt = 0; bt < 40; ++bt) {
      S_new = psd_project(S - alpha * grad);
      resid_new = forward_psd(*prob.map, U, S_new) - b_eps;
      phi_new = 0.5 * resid_new.squaredNorm();
      if (phi_new <= phi + 1e-12 * phi_scale) break;
      alpha *= 0.5;
    }
    const double change = (S_new - S).norm();
    S = S_new;
    resid = resid_new;
    phi = phi_new;
    grad = compressed_adjoint(*prob.map, U, resid);
    if (change <= 1e-13 * std::max(1.0, S.norm())) break;
  }

  out.factor.S = S;
  out.factor.Z = U * psd_sqrt(S);
  out.residual = std::sqrt(2.0 * phi);
  out.factor.origin = FactorOrigin::recovered;
  return out;
}

RefineResult refine_primal(const DualProblem& prob, const CMat& Z0, const RVec& b_eps,
                           const RefineOpts& opts) {
  require(Z0.rows() == prob.map->n(), "refine_primal: factor has wrong rows");
  require(Z0.norm() > 0.0, "refine_primal: Z0 must be nonzero");

  const auto eval_h = [&](const CMat& Z, RVec& resid) {
    resid = prob.map->forward_factored(Z) - b_eps;
    return 0.25 * resid.squaredNorm();
  };
  const auto eval_grad = [&](const CMat& Z, const RVec& resid) -> CMat {
    CMat G(Z.rows(), Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
      G.col(j) = prob.map->adjoint_apply(resid, Z.col(j));
    return G;
  };

  CMat Z = Z0;
  RVec resid;
  double h = eval_h(Z, resid);
  CMat G = eval_grad(Z, resid);
  const double g0 = std::max(1.0, G.norm());
  const double h_floor = 1e-26 * std::max(1.0, b_eps.squaredNorm());

  RefineResult out;
  out.factor.Z = Z;
  out.factor.origin = FactorOrigin::refined;
  out.h = h;
  out.grad_norm = G.norm();

  std::deque<double> memory{h};
  CMat Z_prev, G_prev;
  bool have_prev = false;

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (G.norm() <= opts.tol_grad * g0 || h <= h_floor) break;

    double alpha = 1.0 / std::max(G.norm(), 1e-12);
    if (have_prev) {
      const CMat dZ = Z - Z_prev;
      const CMat dG = G - G_prev;
      const double denom = real_inner(dZ, dG);
      if (denom > 1e-18) alpha = dZ.squaredNorm() / denom;
    }

    const double h_ref = *std::max_element(memory.begin(), memory.end());
    const double g2 = G.squaredNorm();
    CMat Z_new;
    RVec resid_new;
    double h_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      Z_new = Z - alpha * G;
      h_new = eval_h(Z_new, resid_new);
      if (h_new <= h_ref - opts.suff_decrease * alpha * g2) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }
    Z_prev = Z;
    G_prev = G;
    have_prev = true;
    Z = std::move(Z_new);
    resid = std::move(resid_new);
    h = h_new;
    G = eval_grad(Z, resid);
    memory.push_back(h);
    while (static_cast<int>(memory.size()) > opts.nonmonotone_memory)
      memory.pop_front();
    if (h < out.h) {
      out.factor.Z = Z;
      out.h = h;
      out.grad_norm = G.norm();
    }
  }
  out.iterations = it;
  if (G.norm() < out.grad_norm && h <= out.h) {
    out.factor.Z = Z;
    out.h = h;
    out.grad_norm = G.norm();
  }
  return out;
}

DualRefineResult refine_dual(const DualProblem& prob, const PrimalFactor& Zhat,
                             const RVec& y_current, const DualRefineOpts& opts,
                             const EigRequest& eig_req) {
  require(Zhat.Z.norm() > 0.0, "refine_dual: Zhat must be nonzero");
  const CMat& Z = Zhat.Z;
  const double lam = 1.0 / Zhat.trace();

  // M(y) = (A^* y) Z - lam Z; model q = 1/2 ||M||^2.
  const auto eval_model = [&](const RVec& y, CMat& M) {
    M.resize(Z.rows(), Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
      M.col(j) = prob.map->adjoint_apply(y, Z.col(j));
    M -= lam * Z;
    return 0.5 * M.squaredNorm();
  };
  // grad q = A(H), H = (Z M^* + M Z^*)/2, via the polarization identity.
  const auto eval_grad = [&](const CMat& M) -> RVec {
    const RVec plus = prob.map->forward_factored(M + Z);
    const RVec minus = prob.map->forward_factored(M - Z);
    return 0.25 * (plus - minus);
  };

  RVec y = project_feasible(prob.b, prob.eps, y_current);
  CMat M;
  double q = eval_model(y, M);
  RVec g = eval_grad(M);

  std::deque<double> memory{q};
  RVec y_prev, g_prev;
  bool have_prev = false;
  RVec y_best = y;
  double q_best = q;

  for (int it = 0; it < opts.max_iter; ++it) {
    if (q <= opts.tol * std::max(1.0, lam * lam * Zhat.trace())) break;
    double alpha = 1.0 / std::max(g.norm(), 1e-12);
    if (have_prev) {
      const RVec dy = y - y_prev;
      const RVec dg = g - g_prev;
      const double denom = dy.dot(dg);
      if (denom > 1e-18) alpha = dy.squaredNorm() / denom;
    }
    const double q_ref = *std::max_element(memory.begin(), memory.end());
    const double g2 = g.squaredNorm();
    RVec y_new;
    CMat M_new;
    double q_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      y_new = project_feasible(prob.b, prob.eps, y - alpha * g);
      q_new = eval_model(y_new, M_new);
      if (q_new <= q_ref - opts.suff_decrease * alpha * g2 ||
          (y_new - y).norm() <= 1e-15 * std::max(1.0, y.norm())) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
    }
    if (!accepted) break;
    if ((y_new - y).norm() <= 1e-15 * std::max(1.0, y.norm())) break;
    y_prev = y;
    g_prev = g;
    have_prev = true;
    y = std::move(y_new);
    M = std::move(M_new);
    q = q_new;
    g = eval_grad(M);
    memory.push_back(q);
    while (static_cast<int>(memory.size()) > opts.nonmonotone_memory)
      memory.pop_front();
    if (q < q_best) {
      q_best = q;
      y_best = y;
    }
  }

  DualRefineResult out;
  out.y = y_best;
  out.model_value = q_best;
  EigRequest req = eig_req;
  req.warm_start = Z.col(0).normalized();
  auto obj = dual_objective(prob, out.y, req);
  out.f = obj.f;
  out.eig = std::move(obj.eig);
  return out;
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::gauge: return "gauge";
    case Mode::gauge_feas: return "gauge-feas";
    case Mode::gauge_nodfp: return "gauge-nodfp";
  }
  return "?";
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "Optimal";
    case Status::feasible: return "Feasible";
    case Status::infeasible: return "Infeasible";
    case Status::max_iter: return "MaxIter";
  }
  return "?";
}

SolveResult solve_gauge(const DualProblem& prob, const SolveOpts& opts) {
  prob.validate();
  const double bnorm = prob.b.norm();
  // Optimality test from the primal-recovery residual: a zero residual
  // against b_eps at a dual-feasible y certifies optimality, so the exit
  // measures ||A(X) - b_eps|| rather than how closely ||A(X) - b||
  // approaches eps.
  const double feas_tol = opts.tol_feas * std::max(1.0, bnorm);

  DualState state = initial_state(prob, opts.y0, opts.eig);

  SolveResult best;
  best.y = state.y;
  best.f = state.f;
  best.residual = std::numeric_limits<double>::infinity();
  best.gap = std::numeric_limits<double>::infinity();
  double best_score = std::numeric_limits<double>::infinity();

  auto log_iter = [&](int k, double f, double gap, double resid) {
    if (!opts.log) return;
    (*opts.log) << "{\"k\":" << k << ",\"f\":" << f << ",\"gap\":" << gap
                << ",\"residual\":" << resid
                << ",\"nDFT\":" << prob.map->counter().snapshot().dft << "}\n";
  };

  for (int k = 1; k <= opts.max_iter; ++k) {
    if (infeasibility_certificate(prob, state.y, state.f, opts.tol_cert)) {
      SolveResult out;
      out.factor.Z = CMat::Zero(prob.map->n(), 1);
      out.y = state.y;
      out.status = Status::infeasible;
      out.iterations = k;
      out.f = state.f;
      out.gap = -1.0;
      out.residual = bnorm;
      return out;
    }

    // Primal recovery from the current eigenspace, rank capped.
    EigResult eig_capped = state.eig;
    eig_capped.r1 = std::min(eig_capped.r1, opts.max_rank);
    RecoveryResult rec = recover_S(prob, eig_capped, state.y);
    const RVec b_eps = residual_target(prob, state.y);

    PrimalFactor Zhat;
    double resid_model;  // ||A(Z Z^*) - b_eps|| at the candidate
    if (opts.mode == Mode::gauge_nodfp || rec.degenerate ||
        rec.factor.Z.norm() == 0.0) {
      Zhat = rec.factor;
      resid_model = rec.degenerate ? bnorm : rec.residual;
    } else {
      RefineResult rp = refine_primal(prob, rec.factor.Z, b_eps, opts.refine);
      Zhat = std::move(rp.factor);
      resid_model = 2.0 * std::sqrt(rp.h);
    }

    const double resid_b =
        Zhat.Z.norm() > 0.0
            ? (prob.map->forward_factored(Zhat.Z) - prob.b).norm()
            : bnorm;
    const double gap = weak_duality_gap(Zhat.trace(), state.f);
    log_iter(k, state.f, gap, resid_model);

    if (resid_model + std::abs(gap) < best_score) {
      best.factor = Zhat;
      best.y = state.y;
      best.f = state.f;
      best.gap = gap;
      best.residual = resid_b;
      best_score = resid_model + std::abs(gap);
    }

    if (opts.mode == Mode::gauge_feas && resid_model <= feas_tol) {
      SolveResult out;
      out.factor = std::move(Zhat);
      out.y = state.y;
      out.status = Status::feasible;
      out.iterations = k;
      out.f = state.f;
      out.gap = gap;
      out.residual = resid_b;
      return out;
    }
    if (resid_model <= feas_tol && std::abs(gap) <= opts.tol_gap) {
      SolveResult out;
      out.factor = std::move(Zhat);
      out.y = state.y;
      out.status = Status::optimal;
      out.iterations = k;
      out.f = state.f;
      out.gap = gap;
      out.residual = resid_b;
      return out;
    }

    descend_step(prob, state, opts.step, opts.eig);

    if (opts.mode != Mode::gauge_nodfp && Zhat.Z.norm() > 0.0) {
      DualRefineResult dr =
          refine_dual(prob, Zhat, state.y, opts.dual_refine, opts.eig);
      if (dr.f < state.f) {
        // Spacer acceptance (exogenous improved iterate).
        state.y = dr.y;
        state.f = dr.f;
        state.eig = std::move(dr.eig);
        state.g = subgradient(prob, state.eig);
        state.have_prev = false;
        state.f_memory.push_back(state.f);
        while (static_cast<int>(state.f_memory.size()) > opts.step.nonmonotone_memory)
          state.f_memory.pop_front();
        if (state.f < state.f_best) {
          state.f_best = state.f;
          state.y_best = state.y;
          state.eig_best = state.eig;
        }
      }
    }
  }

  // Iteration budget exhausted: return the best snapshot.
  SolveResult out = std::move(best);
  out.status = Status::max_iter;
  out.iterations = opts.max_iter;
  if (out.factor.Z.size() == 0) out.factor.Z = CMat::Zero(prob.map->n(), 1);
  return out;
}

CMat eigenvector_initial_factor(const DualProblem& prob, const EigRequest& req) {
  prob.validate();
  auto obj = dual_objective(prob, prob.b, req);
  const CVec u1 = obj.eig.vectors.col(0);
  // gamma = n sum(b) / sum ||a_i||^2, with sum ||a_i||^2 = sum_k trace(A_k)
  // evaluated through the factored forward on the identity.
  const double norms = prob.map->forward_factored(
      CMat::Identity(prob.map->n(), prob.map->n())).sum();
  const double gamma = static_cast<double>(prob.map->n()) * prob.b.sum() /
                       std::max(norms, 1e-300);
  return u1 * std::sqrt(std::max(gamma, 0.0));
}

}  // namespace gauge
