#include "gauge/eig.hpp"
#include "gauge/rng.hpp"

#include "doctest.h"

using namespace gauge;

namespace {

CMat random_hermitian(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  CMat A = rng.cnormal_mat(n, n);
  return 0.5 * (A + A.adjoint());
}

ApplyFn matvec(const CMat& A) {
  return [&A](const CVec& v) -> CVec { return A * v; };
}

}  // namespace

TEST_CASE("rightmost eigenpairs match a dense eigendecomposition") {
  for (Eigen::Index n : {13, 40}) {
    const CMat A = random_hermitian(n, 100 + static_cast<std::uint64_t>(n));
    Eigen::SelfAdjointEigenSolver<CMat> es(A);
    EigRequest req;
    req.k = 3;
    const EigResult out = rightmost_eigpairs(matvec(A), n, req);
    REQUIRE(out.values.size() >= 3);
    CHECK(out.all_converged());
    for (int i = 0; i < 3; ++i) {
      CHECK(out.values[i] ==
            doctest::Approx(es.eigenvalues()[n - 1 - i]).epsilon(1e-9));
      // Eigenvector correctness through the residual, which is phase-free.
      CHECK((A * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm() <=
            1e-7 * A.norm());
    }
    // Orthonormality of the returned block.
    const CMat G = out.vectors.adjoint() * out.vectors;
    CHECK((G - CMat::Identity(G.rows(), G.cols())).norm() <= 1e-8);
  }
}

TEST_CASE("multiplicity of the rightmost eigenvalue is detected") {
  // Diagonal with a doubled top eigenvalue.
  const Eigen::Index n = 20;
  RVec d = RVec::LinSpaced(n, -1.0, 1.0);
  d[n - 2] = d[n - 1];
  CMat A = d.cast<Complex>().asDiagonal();
  // Conjugate by a random unitary so the eigenvectors are dense.
  Rng rng(12);
  Eigen::HouseholderQR<CMat> qr(rng.cnormal_mat(n, n));
  const CMat Q = qr.householderQ();
  A = Q * A * Q.adjoint();

  EigRequest req;
  req.k = 3;
  const EigResult out = rightmost_eigpairs(matvec(A), n, req);
  CHECK(out.r1 == 2);
  CHECK(out.values[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out.values[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fixed seeds give identical results") {
  const CMat A = random_hermitian(24, 77);
  EigRequest req;
  req.k = 2;
  const EigResult a = rightmost_eigpairs(matvec(A), 24, req);
  const EigResult b = rightmost_eigpairs(matvec(A), 24, req);
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("NaN from the operator is a hard error") {
  ApplyFn bad = [](const CVec& v) -> CVec {
    CVec out = v;
    out[0] = Complex(std::nan(""), 0.0);
    return out;
  };
  CHECK_THROWS_AS(rightmost_eigpairs(bad, 8), numeric_error);
}

TEST_CASE("generalized solve matches the dense pencil") {
  const Eigen::Index n = 18;
  const CMat A = random_hermitian(n, 42);
  Rng rng(43);
  const CMat B = rng.cnormal_mat(n, n);
  const CMat C = B * B.adjoint() + 0.5 * CMat::Identity(n, n);

  // Dense reference: eigenvalues of C^{-1/2} A C^{-1/2}.
  Eigen::SelfAdjointEigenSolver<CMat> cs(C);
  const CMat Cinvhalf = cs.eigenvectors() *
                        cs.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                        cs.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> ref(Cinvhalf * A * Cinvhalf);

  EigRequest req;
  req.k = 2;
  const EigResult out =
      generalized_rightmost(matvec(A), dense_weight_factor(C), n, req);
  CHECK(out.values[0] == doctest::Approx(ref.eigenvalues()[n - 1]).epsilon(1e-9));
  CHECK(out.values[1] == doctest::Approx(ref.eigenvalues()[n - 2]).epsilon(1e-9));
  // Back-transformed vectors satisfy A u = lambda C u with u^* C u = 1.
  const CVec u = out.vectors.col(0);
  CHECK((A * u - out.values[0] * C * u).norm() <= 1e-7 * A.norm());
  CHECK(std::abs(u.dot(C * u).real() - 1.0) <= 1e-8);
}

TEST_CASE("indefinite weights are rejected") {
  CMat C = CMat::Identity(4, 4);
  C(3, 3) = -1.0;
  CHECK_THROWS_AS(dense_weight_factor(C), numeric_error);
}
