#pragma once

#include "gauge/eig.hpp"
#include "gauge/opcore.hpp"

#include <deque>
#include <optional>

namespace gauge {

/// Data of the constrained eigenvalue problem
///   minimize lambda_1(A^* y)  subject to  <b, y> - eps ||y|| >= 1.
struct DualProblem {
  MapPtr map;
  RVec b;
  double eps = 0.0;

  void validate() const {
    require(map != nullptr, "DualProblem: missing measurement map");
    require(b.size() == map->m(), "DualProblem: b has wrong size");
    require(eps >= 0.0 && eps < b.norm(), "DualProblem: requires 0 <= eps < ||b||");
  }
};

struct DualObjective {
  double f = 0.0;   // lambda_1(A^* y)
  EigResult eig;
};

/// <b, y> - eps ||y||; dual-feasible iff >= 1.
inline double dual_constraint_value(const RVec& b, double eps, const RVec& y) {
  return b.dot(y) - eps * y.norm();
}

DualObjective dual_objective(const DualProblem& prob, const RVec& y,
                             const EigRequest& req = {});

/// g = A(U1 T U1^*) for a PSD r1 x r1 mixing matrix T with trace 1.
RVec subgradient(const DualProblem& prob, const EigResult& eig, const CMat& T);

/// Default T = e1 e1^T (single rightmost eigenvector).
RVec subgradient(const DualProblem& prob, const EigResult& eig);

/// Euclidean projection onto {y : <b, y> - eps ||y|| >= 1}.
/// eps = 0 is a halfspace projection; eps > 0 reduces to the real roots of
/// a scalar quartic solved via its companion matrix, with a bisection
/// safeguard on the KKT multiplier.
RVec project_feasible(const RVec& b, double eps, const RVec& y);

struct StepOpts {
  int nonmonotone_memory = 10;
  double suff_decrease = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

struct DualState {
  RVec y;
  double f = 0.0;               // lambda_1(A^* y), equals eig.values[0]
  EigResult eig;
  RVec g;
  int k = 0;                    // iteration counter
  double alpha0 = 0.0;          // base steplength for the 1/k schedule

  // Barzilai-Borwein memory.
  RVec y_prev, g_prev;
  bool have_prev = false;
  std::deque<double> f_memory;  // nonmonotone reference values

  // Lowest-objective snapshot.
  RVec y_best;
  double f_best = 0.0;
  EigResult eig_best;
};

/// Builds a feasible initial state. If y0 is absent, starts from the
/// scaled measurement direction b / (||b||^2 - eps ||b||), which is
/// feasible with an active constraint.
DualState initial_state(const DualProblem& prob, std::optional<RVec> y0 = {},
                        const EigRequest& req = {});

/// One projected-subgradient update. Uses a BB steplength with a
/// nonmonotone linesearch while the top eigenpair is isolated (r1 == 1),
/// and the alpha0/k schedule otherwise. The state's subgradient, memory
/// and best snapshot are refreshed.
void descend_step(const DualProblem& prob, DualState& state,
                  const StepOpts& opts = {}, const EigRequest& req = {});

struct GapResult {
  double gap = 0.0;             // trace(Z Z^*) lambda_1(A^* y) - 1
  bool primal_feasible = true;
  bool dual_feasible = true;
};

GapResult weak_duality_gap(const DualProblem& prob, const CMat& Z, const RVec& y,
                           const EigRequest& req = {});
/// Gap from already-computed quantities.
inline double weak_duality_gap(double trace_x, double f) { return trace_x * f - 1.0; }

inline constexpr double kInfeasibilityTol = 1e-10;

/// True iff lambda_1(A^* y) <= tol at a dual-feasible y, which certifies
/// that the primal problem is infeasible.
bool infeasibility_certificate(const DualProblem& prob, const RVec& y, double f,
                               double tol = kInfeasibilityTol);

}  // namespace gauge
