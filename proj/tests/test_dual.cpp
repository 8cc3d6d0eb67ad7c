#include "gauge/dual.hpp"
#include "gauge/rng.hpp"

#include "doctest.h"

using namespace gauge;

namespace {

DualProblem dense_problem(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  DualProblem prob;
  prob.map = DenseHermitianMap::random(n, m, seed);
  Rng rng(seed ^ 0x5bd1e995);
  const CVec x = rng.cnormal_vec(n);
  prob.b = prob.map->forward_factored(x);
  prob.eps = 0.0;
  return prob;
}

}  // namespace

TEST_CASE("projection: analytic ball case") {
  // b = (1, 0), eps = 1/2, y = 0: the nearest constraint point is (2, 0),
  // where <b, y> - eps ||y|| = 2 - 1 = 1.
  RVec b(2), y(2);
  b << 1.0, 0.0;
  y << 0.0, 0.0;
  const RVec p = project_feasible(b, 0.5, y);
  CHECK((p - (RVec(2) << 2.0, 0.0).finished()).norm() <= 1e-8);
}

TEST_CASE("projection: feasible points are fixed, infeasible become active") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index m = 6;
    RVec b = rng.normal_vec(m);
    const double eps = 0.3 * b.norm() * rng.uniform();
    RVec y = rng.normal_vec(m);

    const RVec p = project_feasible(b, eps, y);
    CHECK(dual_constraint_value(b, eps, p) >= 1.0 - 1e-7);
    if (dual_constraint_value(b, eps, y) >= 1.0) {
      CHECK((p - y).norm() == 0.0);
    } else {
      // Projections land on the boundary and are idempotent.
      CHECK(dual_constraint_value(b, eps, p) <= 1.0 + 1e-6 * std::max(1.0, p.norm()));
      CHECK((project_feasible(b, eps, p) - p).norm() <= 1e-9 * std::max(1.0, p.norm()));
    }
  }
}

TEST_CASE("projection is the nearest feasible point") {
  // Variational test: no sampled feasible z is closer than the projection.
  Rng rng(8);
  const Eigen::Index m = 5;
  RVec b = rng.normal_vec(m);
  const double eps = 0.2 * b.norm();
  for (int trial = 0; trial < 20; ++trial) {
    const RVec y = rng.normal_vec(m);
    const RVec p = project_feasible(b, eps, y);
    const double dp = (p - y).norm();
    for (int j = 0; j < 40; ++j) {
      RVec z = project_feasible(b, eps, rng.normal_vec(m) * 3.0);
      CHECK((z - y).norm() >= dp - 1e-7 * std::max(1.0, dp));
    }
  }
}

TEST_CASE("objective equals the dense rightmost eigenvalue") {
  const DualProblem prob = dense_problem(7, 10, 1);
  Rng rng(2);
  const RVec y = rng.normal_vec(10);
  CMat Ay = CMat::Zero(7, 7);
  for (Eigen::Index k = 0; k < 10; ++k)
    Ay += y[k] * static_cast<const DenseHermitianMap&>(*prob.map).coefficient(k);
  Eigen::SelfAdjointEigenSolver<CMat> es(Ay);
  CHECK(dual_objective(prob, y).f == doctest::Approx(es.eigenvalues()[6]).epsilon(1e-9));
}

TEST_CASE("subgradient inequality holds for random pairs") {
  const DualProblem prob = dense_problem(6, 9, 3);
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const RVec y1 = rng.normal_vec(9);
    const RVec y2 = rng.normal_vec(9);
    const auto o1 = dual_objective(prob, y1);
    const RVec g = subgradient(prob, o1.eig);
    const double f2 = dual_objective(prob, y2).f;
    CHECK(f2 >= o1.f + g.dot(y2 - y1) - 1e-7 * std::max(1.0, std::abs(f2)));
  }
}

TEST_CASE("subgradient mixing matrix must be unit-trace") {
  const DualProblem prob = dense_problem(6, 9, 5);
  const auto obj = dual_objective(prob, prob.b);
  CMat T = CMat::Identity(obj.eig.r1, obj.eig.r1) * 2.0;
  CHECK_THROWS_AS(subgradient(prob, obj.eig, T), contract_error);
}

TEST_CASE("descent reduces the objective on a dense instance") {
  const DualProblem prob = dense_problem(8, 14, 7);
  DualState st = initial_state(prob);
  const double f0 = st.f;
  for (int k = 0; k < 40; ++k) descend_step(prob, st);
  CHECK(st.f_best < f0);
  CHECK(dual_constraint_value(prob.b, prob.eps, st.y) >= 1.0 - 1e-9);
}

TEST_CASE("infeasibility certificate on the diagonal instance") {
  // A(X) = diag(X) with b < 0 is infeasible for X >= 0; y = -e/n is dual
  // feasible with A^* y = -I/n, so lambda_1 < 0 certifies it.
  const Eigen::Index n = 6;
  DualProblem prob;
  prob.map = DenseHermitianMap::diag_extraction(n);
  prob.b = -RVec::Ones(n);
  prob.eps = 0.0;
  const RVec y = -RVec::Ones(n) / static_cast<double>(n);
  REQUIRE(dual_constraint_value(prob.b, prob.eps, y) >= 1.0 - 1e-12);
  const double f = dual_objective(prob, y).f;
  CHECK(infeasibility_certificate(prob, y, f));
}
