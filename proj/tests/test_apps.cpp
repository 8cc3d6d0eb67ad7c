#include "gauge/apps.hpp"
#include "gauge/fft.hpp"
#include "gauge/rng.hpp"

#include "doctest.h"

#include <cmath>

using namespace gauge;

namespace {

// Dense unitary DFT matrix.
CMat dft_matrix(Eigen::Index n) {
  CMat F(n, n);
  const double w = -2.0 * M_PI / static_cast<double>(n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      F(r, c) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                           w * static_cast<double>(r * c));
  return F;
}

}  // namespace

TEST_CASE("transforms: unitarity and conventions") {
  Rng rng(1);
  const CVec x = rng.cnormal_vec(16);
  CHECK(unitary_dft(x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
  CHECK((unitary_idft(unitary_dft(x)) - x).norm() <= 1e-12 * x.norm());
  CHECK((raw_idft(raw_dft(x)) - x).norm() <= 1e-12 * x.norm());
  CHECK((raw_dft(x) - std::sqrt(16.0) * unitary_dft(x)).norm() <= 1e-12 * x.norm());

  CVec two(2);
  two << 1.0, 1.0;
  CHECK((haar_analysis(two) - (CVec(2) << M_SQRT2, 0.0).finished()).norm() <= 1e-14);
  two << 1.0, -1.0;
  CHECK((haar_analysis(two) - (CVec(2) << 0.0, M_SQRT2).finished()).norm() <= 1e-14);
  const CVec h = rng.cnormal_vec(8);
  CHECK(haar_analysis(h).norm() == doctest::Approx(h.norm()).epsilon(1e-12));
  CHECK((haar_synthesis(haar_analysis(h)) - h).norm() <= 1e-12 * h.norm());
  CHECK_THROWS_AS(haar_analysis(rng.cnormal_vec(6)), contract_error);
}

TEST_CASE("octanary masks have the stated law") {
  const auto masks = pr_make_masks(16384, 6, MaskKind::octanary, 9);
  double power = 0.0, heavy = 0.0, count = 0.0;
  for (const CVec& mask : masks) {
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      const Complex d = mask[i];
      const double mag = std::abs(d);
      const bool light = std::abs(mag - M_SQRT1_2) <= 1e-12;
      const bool big = std::abs(mag - std::sqrt(3.0)) <= 1e-12;
      REQUIRE((light || big));
      // The phase is quaternary: d is purely real or purely imaginary.
      REQUIRE(std::min(std::abs(d.real()), std::abs(d.imag())) <= 1e-12);
      power += mag * mag;
      heavy += big ? 1.0 : 0.0;
      count += 1.0;
    }
  }
  CHECK(power / count == doctest::Approx(1.0).epsilon(0.02));
  CHECK(heavy / count == doctest::Approx(0.2).epsilon(0.10));
}

TEST_CASE("phase-retrieval map matches its dense coefficient matrices") {
  const Eigen::Index n = 8, L = 2;
  auto map = pr_make_operator(PhaseRetrievalSpec::make(n, L, MaskKind::gaussian, 31));
  const CMat F = dft_matrix(n);

  // A_(k,t) = (F C_k)^* e_t e_t^T (F C_k), stacked mask-major.
  std::vector<CMat> mats;
  for (Eigen::Index k = 0; k < L; ++k) {
    const CMat FC = F * map->spec().masks[k].asDiagonal();
    for (Eigen::Index t = 0; t < n; ++t)
      mats.push_back(FC.row(t).adjoint() * FC.row(t));
  }
  DenseHermitianMap dense(mats);

  Rng rng(32);
  const CMat Z = rng.cnormal_mat(n, 2);
  const RVec fa = map->forward_factored(Z);
  const RVec fb = dense.forward_factored(Z);
  CHECK((fa - fb).norm() <= 1e-10 * std::max(1.0, fb.norm()));

  const RVec y = rng.normal_vec(n * L);
  const CVec v = rng.cnormal_vec(n);
  CHECK((map->adjoint_apply(y, v) - dense.adjoint_apply(y, v)).norm() <=
        1e-10 * std::max(1.0, v.norm()));
}

TEST_CASE("phase-retrieval forward counts one DFT per mask and column") {
  auto map = pr_make_operator(PhaseRetrievalSpec::make(16, 3, MaskKind::octanary, 7));
  Rng rng(8);
  const OpCounts before = map->counter().snapshot();
  map->forward_factored(rng.cnormal_mat(16, 2));
  CHECK((map->counter().snapshot() - before).dft == 6);
  map->adjoint_apply(rng.normal_vec(48), rng.cnormal_vec(16));
  CHECK((map->counter().snapshot() - before).dft == 12);
}

TEST_CASE("blind-deconvolution forward is a circular convolution") {
  BlindDeconvSpec spec;
  spec.m = 16;
  spec.n1 = 4;
  spec.n2 = 4;
  spec.seed = 5;
  auto map = bd_make_operator(spec);
  Rng rng(6);
  const CVec z1 = rng.cnormal_vec(4);
  const CVec z2 = rng.cnormal_vec(4);

  const CVec u = map->apply_b1(z1);
  CVec w = CVec::Zero(16);
  w.head(4) = z2.conjugate();
  CVec conv = CVec::Zero(16);
  for (Eigen::Index t = 0; t < 16; ++t)
    for (Eigen::Index s = 0; s < 16; ++s) conv[t] += u[s] * w[(t - s + 16) % 16];

  CMat Z1(4, 1), Z2(4, 1);
  Z1.col(0) = z1;
  Z2.col(0) = z2;
  CHECK((map->forward_factored(Z1, Z2) - conv).norm() <= 1e-12 * conv.norm());
}

TEST_CASE("blind-deconvolution adjoints match dense coefficients") {
  BlindDeconvSpec spec;
  spec.m = 8;
  spec.n1 = 4;
  spec.n2 = 4;
  spec.seed = 12;
  auto map = bd_make_operator(spec);

  // Dense coefficients from forwards on elementary rank-1 factors:
  // A(e_i e_j^*)_k = conj((A_k)_ij).
  std::vector<CMat> mats(8, CMat::Zero(4, 4));
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      CMat E1 = CMat::Zero(4, 1), E2 = CMat::Zero(4, 1);
      E1(i, 0) = 1.0;
      E2(j, 0) = 1.0;
      const CVec out = map->forward_factored(E1, E2);
      for (Eigen::Index k = 0; k < 8; ++k) mats[k](i, j) = std::conj(out[k]);
    }

  Rng rng(13);
  const CVec y = rng.cnormal_vec(8);
  CMat N = CMat::Zero(4, 4);
  for (Eigen::Index k = 0; k < 8; ++k) N += y[k] * mats[k];
  const CVec v = rng.cnormal_vec(4);
  const CVec u = rng.cnormal_vec(4);
  CHECK((map->adjoint_apply(y, v) - N * v).norm() <= 1e-10 * std::max(1.0, N.norm()));
  CHECK((map->adjoint_apply_h(y, u) - N.adjoint() * u).norm() <=
        1e-10 * std::max(1.0, N.norm()));
}

TEST_CASE("reweighting against a unit factor") {
  // Zhat = e1, delta = 1: C^{-1} = I + e1 e1^*, so C = diag(1/2, 1, ..., 1).
  const Eigen::Index n = 5;
  CMat Z = CMat::Zero(n, 1);
  Z(0, 0) = 1.0;
  auto spec = reweight(Z, 1.0);
  Rng rng(14);
  const CVec v = rng.cnormal_vec(n);
  CVec want = v;
  want[0] *= 0.5;
  CHECK((spec.apply_c(v) - want).norm() <= 1e-12 * v.norm());
  // R^{-1} R^{-*} = C^{-1} = delta I + Z Z^*.
  const CVec cinv_v = spec.factor.apply_rinv(spec.factor.apply_rinv_h(v));
  CHECK((cinv_v - (v + Z * (Z.adjoint() * v))).norm() <= 1e-12 * v.norm());
}

TEST_CASE("weighted trace dual identities") {
  DualProblem prob;
  prob.map = DenseHermitianMap::random(6, 10, 15);
  Rng rng(16);
  prob.b = prob.map->forward_factored(rng.cnormal_vec(6));
  prob.eps = 0.0;
  const RVec y = rng.normal_vec(10);

  const double f_plain = dual_objective(prob, y).f;
  const CMat I = CMat::Identity(6, 6);
  CHECK(weighted_trace_dual(prob, I, y).f == doctest::Approx(f_plain).epsilon(1e-10));
  CHECK(weighted_trace_dual(prob, CMat(2.0 * I), y).f ==
        doctest::Approx(0.5 * f_plain).epsilon(1e-10));
}

TEST_CASE("weighted nuclear dual matches a dense SVD") {
  auto amap = DenseAsymmetricMap::random(5, 6, 7, 17);
  Rng rng(18);
  const CVec y = rng.cnormal_vec(7);
  CMat N = CMat::Zero(5, 6);
  for (Eigen::Index k = 0; k < 7; ++k) N += y[k] * amap->coefficient(k);

  const CMat I1 = CMat::Identity(5, 5), I2 = CMat::Identity(6, 6);
  Eigen::JacobiSVD<CMat> svd(N);
  auto plain = weighted_nuclear_dual(*amap, I1, I2, y);
  CHECK(plain.value == doctest::Approx(svd.singularValues()[0]).epsilon(1e-10));

  // Generic invertible weights.
  const CMat B1 = rng.cnormal_mat(5, 5);
  const CMat B2 = rng.cnormal_mat(6, 6);
  const CMat C1 = B1 * B1.adjoint() + I1;
  const CMat C2 = B2 * B2.adjoint() + I2;
  Eigen::JacobiSVD<CMat> wsvd(C1.inverse() * N * C2.adjoint().inverse());
  auto weighted = weighted_nuclear_dual(*amap, C1, C2, y);
  CHECK(weighted.value ==
        doctest::Approx(wsvd.singularValues()[0]).epsilon(1e-10));
}
