#include "gauge/opcore.hpp"

#include "gauge/rng.hpp"

namespace gauge {

DenseHermitianMap::DenseHermitianMap(std::vector<CMat> mats)
    : MeasurementMap(mats.empty() ? 0 : mats.front().rows(),
                     static_cast<Eigen::Index>(mats.size())),
      mats_(std::move(mats)) {
  for (const auto& A : mats_) {
    require(A.rows() == n() && A.cols() == n(), "dense map: coefficient shape");
    require((A - A.adjoint()).norm() <= 1e-12 * std::max(1.0, A.norm()),
            "dense map: coefficients must be Hermitian");
  }
}

std::shared_ptr<DenseHermitianMap> DenseHermitianMap::random(Eigen::Index n,
                                                             Eigen::Index m,
                                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CMat> mats;
  mats.reserve(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    CMat G = rng.cnormal_mat(n, n);
    mats.push_back(0.5 * (G + G.adjoint()));
  }
  return std::make_shared<DenseHermitianMap>(std::move(mats));
}

std::shared_ptr<DenseHermitianMap> DenseHermitianMap::diag_extraction(Eigen::Index n) {
  std::vector<CMat> mats;
  mats.reserve(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    CMat A = CMat::Zero(n, n);
    A(k, k) = 1.0;
    mats.push_back(std::move(A));
  }
  return std::make_shared<DenseHermitianMap>(std::move(mats));
}

RVec DenseHermitianMap::do_forward(const CMat& Z) const {
  RVec out(m());
  for (Eigen::Index k = 0; k < m(); ++k)
    out[k] = (Z.adjoint() * (mats_[k] * Z)).trace().real();
  counter().add_mul(static_cast<std::uint64_t>(m()) * Z.cols());
  return out;
}

CVec DenseHermitianMap::do_adjoint(const RVec& y, const CVec& v) const {
  CVec out = CVec::Zero(n());
  for (Eigen::Index k = 0; k < m(); ++k) out += y[k] * (mats_[k] * v);
  counter().add_mul(static_cast<std::uint64_t>(m()));
  return out;
}

DenseAsymmetricMap::DenseAsymmetricMap(std::vector<CMat> mats)
    : AsymmetricMap(mats.empty() ? 0 : mats.front().rows(),
                    mats.empty() ? 0 : mats.front().cols(),
                    static_cast<Eigen::Index>(mats.size())),
      mats_(std::move(mats)) {
  for (const auto& A : mats_)
    require(A.rows() == n1() && A.cols() == n2(), "dense asym map: coefficient shape");
}

std::shared_ptr<DenseAsymmetricMap> DenseAsymmetricMap::random(Eigen::Index n1,
                                                               Eigen::Index n2,
                                                               Eigen::Index m,
                                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CMat> mats;
  mats.reserve(m);
  for (Eigen::Index k = 0; k < m; ++k) mats.push_back(rng.cnormal_mat(n1, n2));
  return std::make_shared<DenseAsymmetricMap>(std::move(mats));
}

CVec DenseAsymmetricMap::do_forward(const CMat& Z1, const CMat& Z2) const {
  // <Z1 Z2^*, A_k> = trace(Z1 Z2^* A_k^*) = trace(Z2^* A_k^* Z1).
  CVec out(m());
  for (Eigen::Index k = 0; k < m(); ++k)
    out[k] = (Z2.adjoint() * (mats_[k].adjoint() * Z1)).trace();
  counter().add_mul(static_cast<std::uint64_t>(m()) * Z1.cols());
  return out;
}

CVec DenseAsymmetricMap::do_adjoint(const CVec& y, const CVec& v) const {
  CVec out = CVec::Zero(n1());
  for (Eigen::Index k = 0; k < m(); ++k) out += y[k] * (mats_[k] * v);
  counter().add_mul(static_cast<std::uint64_t>(m()));
  return out;
}

CVec DenseAsymmetricMap::do_adjoint_h(const CVec& y, const CVec& u) const {
  CVec out = CVec::Zero(n2());
  for (Eigen::Index k = 0; k < m(); ++k) out += std::conj(y[k]) * (mats_[k].adjoint() * u);
  counter().add_mul(static_cast<std::uint64_t>(m()));
  return out;
}

EmbeddedMap::EmbeddedMap(AsymMapPtr amap, bool real_measurements)
    : MeasurementMap(amap->n1() + amap->n2(),
                     real_measurements ? amap->m() : 2 * amap->m()),
      amap_(std::move(amap)),
      real_(real_measurements) {}

CVec EmbeddedMap::lift_y(const RVec& y) const {
  const Eigen::Index mc = amap_->m();
  CVec yh(mc);
  if (real_) {
    for (Eigen::Index k = 0; k < mc; ++k) yh[k] = y[k];
  } else {
    for (Eigen::Index k = 0; k < mc; ++k) yh[k] = Complex(y[k], y[mc + k]);
  }
  return yh;
}

RVec EmbeddedMap::do_forward(const CMat& Z) const {
  const Eigen::Index n1 = amap_->n1();
  const CMat Z1 = Z.topRows(n1);
  const CMat Z2 = Z.bottomRows(amap_->n2());
  const CVec w = amap_->forward_factored(Z1, Z2);
  RVec out(m());
  if (real_) {
    out = 2.0 * w.real();
  } else {
    out.head(amap_->m()) = 2.0 * w.real();
    out.tail(amap_->m()) = 2.0 * w.imag();
  }
  return out;
}

CVec EmbeddedMap::do_adjoint(const RVec& y, const CVec& v) const {
  const Eigen::Index n1 = amap_->n1();
  const CVec yh = lift_y(y);
  CVec out(n());
  out.head(n1) = amap_->adjoint_apply(yh, v.tail(amap_->n2()));
  out.tail(amap_->n2()) = amap_->adjoint_apply_h(yh, v.head(n1));
  return out;
}

CMat EmbeddedMap::extract_offdiag(const CMat& W) const {
  require(W.rows() == n(), "extract_offdiag: factor has wrong row count");
  return 2.0 * W.topRows(amap_->n1()) * W.bottomRows(amap_->n2()).adjoint();
}

std::shared_ptr<const EmbeddedMap> embed_asymmetric(AsymMapPtr amap,
                                                    bool real_measurements) {
  return std::make_shared<const EmbeddedMap>(std::move(amap), real_measurements);
}

}  // namespace gauge
