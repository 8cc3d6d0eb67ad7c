#include "gauge/opcore.hpp"
#include "gauge/rng.hpp"

#include "doctest.h"

using namespace gauge;

namespace {

// <A(Z Z^*), y> == sum_j Re z_j^* (A^* y) z_j, the defining adjoint pair.
double adjoint_pair_error(const MeasurementMap& map, std::uint64_t seed) {
  Rng rng(seed);
  const CMat Z = rng.cnormal_mat(map.n(), 2);
  const RVec y = rng.normal_vec(map.m());
  const double lhs = y.dot(map.forward_factored(Z));
  double rhs = 0.0;
  for (Eigen::Index j = 0; j < Z.cols(); ++j)
    rhs += Z.col(j).dot(map.adjoint_apply(y, Z.col(j))).real();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

}  // namespace

TEST_CASE("dense map matches explicit coefficient matrices") {
  auto map = DenseHermitianMap::random(6, 9, 11);
  Rng rng(3);
  const CMat Z = rng.cnormal_mat(6, 2);
  const CMat X = Z * Z.adjoint();
  const RVec out = map->forward_factored(Z);
  for (Eigen::Index k = 0; k < 9; ++k) {
    const double want = (map->coefficient(k).conjugate().cwiseProduct(X)).sum().real();
    CHECK(out[k] == doctest::Approx(want).epsilon(1e-12));
  }
  const RVec y = rng.normal_vec(9);
  CMat Ay = CMat::Zero(6, 6);
  for (Eigen::Index k = 0; k < 9; ++k) Ay += y[k] * map->coefficient(k);
  const CVec v = rng.cnormal_vec(6);
  CHECK((map->adjoint_apply(y, v) - Ay * v).norm() <= 1e-12 * Ay.norm() * v.norm());
}

TEST_CASE("dense map adjoint pairing") {
  auto map = DenseHermitianMap::random(8, 12, 5);
  CHECK(adjoint_pair_error(*map, 17) <= 1e-12);
}

TEST_CASE("diagonal extraction map") {
  auto map = DenseHermitianMap::diag_extraction(5);
  Rng rng(9);
  const CMat Z = rng.cnormal_mat(5, 1);
  const RVec d = map->forward_factored(Z);
  CHECK((d - Z.cwiseAbs2().rowwise().sum()).norm() <= 1e-14 * d.norm());
  const RVec y = rng.normal_vec(5);
  const CVec v = rng.cnormal_vec(5);
  CHECK((map->adjoint_apply(y, v) - y.asDiagonal() * v).norm() <= 1e-14);
}

TEST_CASE("dimension contracts are enforced") {
  auto map = DenseHermitianMap::random(4, 6, 1);
  CHECK_THROWS_AS(map->forward_factored(CMat::Zero(5, 1)), contract_error);
  CHECK_THROWS_AS(map->adjoint_apply(RVec::Zero(5), CVec::Zero(4)), contract_error);
  CHECK_THROWS_AS(map->adjoint_apply(RVec::Zero(6), CVec::Zero(3)), contract_error);
}

TEST_CASE("operation counters accumulate monotonically") {
  auto map = DenseHermitianMap::random(4, 6, 2);
  const OpCounts before = map->counter().snapshot();
  map->counter().add_dft(3);
  map->counter().add_dwt(2);
  const OpCounts after = map->counter().snapshot() - before;
  CHECK(after.dft == 3);
  CHECK(after.dwt == 2);
  CHECK(after.total() == 5);
}

TEST_CASE("embedded map realizes the block structure") {
  auto amap = DenseAsymmetricMap::random(3, 4, 5, 21);
  auto emap = embed_asymmetric(amap);
  CHECK(emap->n() == 7);
  CHECK(emap->m() == 10);

  Rng rng(4);
  // Dense A^* y for a lifted complex y.
  const RVec y = rng.normal_vec(10);
  CVec yc(5);
  for (int k = 0; k < 5; ++k) yc[k] = Complex(y[k], y[5 + k]);
  CMat N = CMat::Zero(3, 4);
  for (int k = 0; k < 5; ++k) N += yc[k] * amap->coefficient(k);

  // Embedded adjoint columns reconstruct [[0, N], [N^*, 0]].
  CMat H(7, 7);
  for (int j = 0; j < 7; ++j) H.col(j) = emap->adjoint_apply(y, CVec::Unit(7, j));
  CHECK((H - H.adjoint()).norm() <= 1e-12 * std::max(1.0, H.norm()));
  CHECK((H.topLeftCorner(3, 3)).norm() <= 1e-12);
  CHECK((H.bottomRightCorner(4, 4)).norm() <= 1e-12);
  CHECK((H.topRightCorner(3, 4) - N).norm() <= 1e-12 * std::max(1.0, N.norm()));

  // Forward on W = [Z1; Z2] stacks 2 Re / 2 Im of the rectangular forward.
  CMat W(7, 2);
  W.topRows(3) = rng.cnormal_mat(3, 2);
  W.bottomRows(4) = rng.cnormal_mat(4, 2);
  const CVec w = amap->forward_factored(W.topRows(3), W.bottomRows(4));
  const RVec f = emap->forward_factored(W);
  CHECK((f.head(5) - 2.0 * w.real()).norm() <= 1e-12 * std::max(1.0, w.norm()));
  CHECK((f.tail(5) - 2.0 * w.imag()).norm() <= 1e-12 * std::max(1.0, w.norm()));

  // The off-diagonal block extraction undoes the 1/2 embedding factor.
  CHECK((emap->extract_offdiag(W) - 2.0 * W.topRows(3) * W.bottomRows(4).adjoint())
            .norm() <= 1e-13);
  CHECK(adjoint_pair_error(*emap, 31) <= 1e-12);
}

TEST_CASE("real-measurement embedding keeps only real parts") {
  auto amap = DenseAsymmetricMap::random(3, 3, 4, 5);
  auto emap = embed_asymmetric(amap, /*real_measurements=*/true);
  CHECK(emap->m() == 4);
  Rng rng(6);
  CMat W(6, 1);
  W.col(0) = rng.cnormal_vec(6);
  const CVec w = amap->forward_factored(W.topRows(3), W.bottomRows(3));
  CHECK((emap->forward_factored(W) - 2.0 * w.real()).norm() <= 1e-12);
  CHECK(adjoint_pair_error(*emap, 32) <= 1e-12);
}
