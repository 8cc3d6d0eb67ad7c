#pragma once

#include "gauge/dual.hpp"

#include <iosfwd>

namespace gauge {

enum class FactorOrigin { recovered, refined };

/// Tall complex factor Z with X = Z Z^* (PSD by construction).
struct PrimalFactor {
  CMat Z;
  CMat S;                        // recovery coefficient matrix, when applicable
  FactorOrigin origin = FactorOrigin::recovered;

  double trace() const { return Z.squaredNorm(); }
};

struct RecoveryResult {
  PrimalFactor factor;
  double residual = 0.0;         // ||A(X) - b_eps||
  double s_scalar = 0.0;         // rank-1 coefficient when r1 == 1
  bool degenerate = false;       // ||A(u1 u1^*)|| == 0
};

/// b_eps = b - eps y / ||y||, the recovery target.
RVec residual_target(const DualProblem& prob, const RVec& y);

/// Solves min_{S >= 0} ||A(U1 S U1^*) - b_eps||^2 over the leading
/// eigenspace; closed form when r1 == 1, projected gradient otherwise.
RecoveryResult recover_S(const DualProblem& prob, const EigResult& eig, const RVec& y);

struct RefineOpts {
  int max_iter = 500;
  double tol_grad = 1e-7;        // relative to max(1, ||grad(Z0)||)
  int nonmonotone_memory = 10;
  double suff_decrease = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

struct RefineResult {
  PrimalFactor factor;
  double h = 0.0;                // 1/4 ||A(Z Z^*) - b_eps||^2 at the result
  double grad_norm = 0.0;
  int iterations = 0;
  bool line_search_failed = false;
};

/// Spectral-gradient descent with nonmonotone linesearch on
/// h(Z) = 1/4 ||A(Z Z^*) - b_eps||^2; returns the best iterate found.
RefineResult refine_primal(const DualProblem& prob, const CMat& Z0, const RVec& b_eps,
                           const RefineOpts& opts = {});

struct DualRefineResult {
  RVec y;
  double f = 0.0;                // lambda_1(A^* y) at the candidate
  EigResult eig;
  double model_value = 0.0;      // 1/2 ||(A^* y) Z - lam Z||^2 at the candidate
};

struct DualRefineOpts {
  int max_iter = 100;
  double tol = 1e-10;
  int nonmonotone_memory = 10;
  double suff_decrease = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

/// Projected-gradient solve of the constrained least-squares model
///   min 1/2 ||(A^* y) Z - lam Z||^2  s.t.  <b, y> - eps ||y|| >= 1,
/// with lam = 1 / trace(Z Z^*), started from y_current. Returns the
/// candidate together with its true dual objective.
DualRefineResult refine_dual(const DualProblem& prob, const PrimalFactor& Zhat,
                             const RVec& y_current, const DualRefineOpts& opts = {},
                             const EigRequest& eig_req = {});

enum class Mode { gauge, gauge_feas, gauge_nodfp };
enum class Status { optimal, feasible, infeasible, max_iter };

const char* to_string(Mode m);
const char* to_string(Status s);

struct SolveOpts {
  Mode mode = Mode::gauge;
  int max_iter = 1000;
  double tol_feas = 1e-5;
  double tol_gap = 1e-5;
  double tol_cert = kInfeasibilityTol;
  int max_rank = 4;
  EigRequest eig;
  StepOpts step;
  RefineOpts refine;
  DualRefineOpts dual_refine;
  std::optional<RVec> y0;
  std::ostream* log = nullptr;   // JSON-lines iteration records when set
};

struct SolveResult {
  PrimalFactor factor;
  RVec y;
  Status status = Status::max_iter;
  int iterations = 0;
  double f = 0.0;                // dual objective at the returned y
  double gap = 0.0;              // trace(X) f - 1
  double residual = 0.0;         // ||A(X) - b||
};

/// The full dual-descent loop: eigenpairs -> subgradient -> projected step
/// -> primal recovery -> primal refinement -> dual refinement -> spacer
/// acceptance. Mode gauge_nodfp skips the refinement steps; gauge_feas
/// exits on the first primal-feasible refined iterate.
SolveResult solve_gauge(const DualProblem& prob, const SolveOpts& opts = {});

/// Alternative baseline initialization gamma * u1 from a leading
/// eigenvector of A^* b (opt-in; not used by solve_gauge).
CMat eigenvector_initial_factor(const DualProblem& prob, const EigRequest& req = {});

}  // namespace gauge
