#include "gauge/apps.hpp"

#include "gauge/fft.hpp"
#include "gauge/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <utility>

namespace gauge {

std::vector<CVec> pr_make_masks(Eigen::Index n, Eigen::Index L, MaskKind kind,
                                std::uint64_t seed) {
  require(n >= 1 && L >= 1, "pr_make_masks: n, L must be positive");
  Rng rng(seed);
  std::vector<CVec> masks(static_cast<std::size_t>(L));
  for (auto& mask : masks) {
    mask.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (kind == MaskKind::gaussian) {
        mask[i] = rng.cnormal();
      } else {
        static const Complex phases[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        const Complex d1 = phases[rng.bits() & 3];
        const double d2 = rng.uniform() < 0.8 ? M_SQRT1_2 : std::sqrt(3.0);
        mask[i] = d1 * d2;
      }
    }
  }
  return masks;
}

PhaseRetrievalSpec PhaseRetrievalSpec::make(Eigen::Index n, Eigen::Index L,
                                            MaskKind kind, std::uint64_t seed) {
  PhaseRetrievalSpec spec;
  spec.n = n;
  spec.L = L;
  spec.mask_kind = kind;
  spec.seed = seed;
  spec.masks = pr_make_masks(n, L, kind, seed);
  return spec;
}

void PhaseRetrievalSpec::validate() const {
  require(n >= 1 && L >= 1, "PhaseRetrievalSpec: n, L must be positive");
  require(static_cast<Eigen::Index>(masks.size()) == L,
          "PhaseRetrievalSpec: expected L masks");
  for (const CVec& mask : masks) {
    require(mask.size() == n, "PhaseRetrievalSpec: mask has wrong length");
    require((mask.array() != Complex(0, 0)).all(),
            "PhaseRetrievalSpec: masks must be nonzero");
  }
}

PhaseRetrievalMap::PhaseRetrievalMap(PhaseRetrievalSpec spec)
    : MeasurementMap(spec.n, spec.n * spec.L), spec_(std::move(spec)) {
  spec_.validate();
}

RVec PhaseRetrievalMap::do_forward(const CMat& Z) const {
  const Eigen::Index n = spec_.n, L = spec_.L;
  RVec b = RVec::Zero(n * L);
  for (Eigen::Index k = 0; k < L; ++k) {
    const CVec& mask = spec_.masks[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      const CVec f = unitary_dft(mask.cwiseProduct(Z.col(j)));
      b.segment(k * n, n) += f.cwiseAbs2();
    }
  }
  counter().add_dft(static_cast<std::uint64_t>(L * Z.cols()));
  return b;
}

CVec PhaseRetrievalMap::do_adjoint(const RVec& y, const CVec& v) const {
  const Eigen::Index n = spec_.n, L = spec_.L;
  CVec out = CVec::Zero(n);
  for (Eigen::Index k = 0; k < L; ++k) {
    const CVec& mask = spec_.masks[static_cast<std::size_t>(k)];
    const CVec f = unitary_dft(mask.cwiseProduct(v));
    const CVec g = unitary_idft(y.segment(k * n, n).cast<Complex>().cwiseProduct(f));
    out += mask.conjugate().cwiseProduct(g);
  }
  counter().add_dft(static_cast<std::uint64_t>(2 * L));
  return out;
}

std::shared_ptr<const PhaseRetrievalMap> pr_make_operator(PhaseRetrievalSpec spec) {
  return std::make_shared<const PhaseRetrievalMap>(std::move(spec));
}

void BlindDeconvSpec::validate() const {
  require(m >= 1 && is_pow2(m), "BlindDeconvSpec: m must be a power of two");
  require(n1 >= 1 && n1 <= m, "BlindDeconvSpec: requires 1 <= n1 <= m");
  require(n2 >= 1 && n2 <= m, "BlindDeconvSpec: requires 1 <= n2 <= m");
}

BlindDeconvMap::BlindDeconvMap(BlindDeconvSpec spec)
    : AsymmetricMap(spec.n1, spec.n2, spec.m), spec_(spec) {
  spec_.validate();
}

CVec BlindDeconvMap::apply_b1(const CVec& z) const {
  CVec padded = CVec::Zero(spec_.m);
  padded.head(spec_.n1) = z;
  counter().add_dwt(1);
  return haar_synthesis(padded);
}

CVec BlindDeconvMap::apply_b1_h(const CVec& w) const {
  counter().add_dwt(1);
  return haar_analysis(w).head(spec_.n1);
}

namespace {

CVec pad_head(const CVec& z, Eigen::Index m) {
  CVec out = CVec::Zero(m);
  out.head(z.size()) = z;
  return out;
}

}  // namespace

CVec BlindDeconvMap::do_forward(const CMat& Z1, const CMat& Z2) const {
  const Eigen::Index m = spec_.m;
  // diag((F B1) Z1 Z2^* (conj(F) B2)^*) = sum_j (F B1 z1_j) o (F B2 conj(z2_j))
  CVec hat = CVec::Zero(m);
  for (Eigen::Index j = 0; j < Z1.cols(); ++j) {
    const CVec f1 = raw_dft(apply_b1(Z1.col(j)));
    const CVec f2 = raw_dft(pad_head(Z2.col(j).conjugate(), m).eval());
    hat += f1.cwiseProduct(f2);
  }
  counter().add_dft(static_cast<std::uint64_t>(2 * Z1.cols() + 1));
  return raw_idft(hat);
}

CVec BlindDeconvMap::do_adjoint(const CVec& y, const CVec& v) const {
  const Eigen::Index m = spec_.m;
  // A^* y = B1^* F^* Diag(F y / m) conj(F) B2; note conj(F) w = conj(F conj(w))
  // and F^* w = m F^{-1} w for the raw DFT.
  const CVec yhat = raw_dft(y) / static_cast<double>(m);
  const CVec g2 = raw_dft(pad_head(v.conjugate(), m).eval()).conjugate();
  const CVec w = raw_idft(yhat.cwiseProduct(g2)) * static_cast<double>(m);
  counter().add_dft(3);
  return apply_b1_h(w);
}

CVec BlindDeconvMap::do_adjoint_h(const CVec& y, const CVec& u) const {
  const Eigen::Index m = spec_.m;
  // (A^* y)^* u = B2^* F^T Diag(conj(F y / m)) F B1 u, and F^T = F.
  const CVec yhat = raw_dft(y) / static_cast<double>(m);
  const CVec f1 = raw_dft(apply_b1(u));
  const CVec w = raw_dft(yhat.conjugate().cwiseProduct(f1));
  counter().add_dft(3);
  return w.head(spec_.n2);
}

std::shared_ptr<const BlindDeconvMap> bd_make_operator(BlindDeconvSpec spec) {
  return std::make_shared<const BlindDeconvMap>(spec);
}

WeightedSpec reweight(const CMat& Zhat, double delta) {
  require(delta > 0.0, "reweight: delta must be positive");
  const Eigen::Index n = Zhat.rows();
  const double sd = std::sqrt(delta);

  // Thin spectral form Z Z^* = Q D Q^* through the r x r Gram matrix, so
  // (delta I + Z Z^*)^{1/2} = sqrt(delta) I + Q (sqrt(delta + D) - sqrt(delta)) Q^*
  // and C = (delta I + Z Z^*)^{-1} follows from the same Q, D.
  Eigen::SelfAdjointEigenSolver<CMat> es(Zhat.adjoint() * Zhat);
  std::vector<Eigen::Index> keep;
  const double floor = 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > floor) keep.push_back(i);

  const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
  CMat Q(n, r);
  RVec d(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    d[i] = es.eigenvalues()[keep[static_cast<std::size_t>(i)]];
    Q.col(i) = Zhat * es.eigenvectors().col(keep[static_cast<std::size_t>(i)]) /
               std::sqrt(d[i]);
  }

  const RVec sqrt_gain = ((d.array() + delta).sqrt() - sd).matrix();
  const RVec inv_gain = (d.array() / (delta * (d.array() + delta))).matrix();

  WeightedSpec spec;
  spec.delta = delta;
  auto rinv = [=](const CVec& v) -> CVec {
    if (r == 0) return sd * v;
    return sd * v + Q * sqrt_gain.cast<Complex>().asDiagonal() * (Q.adjoint() * v);
  };
  spec.factor.apply_rinv = rinv;
  spec.factor.apply_rinv_h = rinv;  // Hermitian factor
  spec.apply_c = [=](const CVec& v) -> CVec {
    CVec out = v / delta;
    if (r > 0) out -= Q * inv_gain.cast<Complex>().asDiagonal() * (Q.adjoint() * v);
    return out;
  };
  return spec;
}

DualObjective weighted_trace_dual(const DualProblem& prob, const WeightFactor& weight,
                                  const RVec& y, const EigRequest& req) {
  prob.validate();
  const auto& map = *prob.map;
  ApplyFn apply = [&map, &y](const CVec& v) { return map.adjoint_apply(y, v); };
  DualObjective out;
  out.eig = generalized_rightmost(apply, weight, map.n(), req);
  out.f = out.eig.values[0];
  return out;
}

DualObjective weighted_trace_dual(const DualProblem& prob, const CMat& C,
                                  const RVec& y, const EigRequest& req) {
  return weighted_trace_dual(prob, dense_weight_factor(C), y, req);
}

WeightedNuclearResult weighted_nuclear_dual(const AsymmetricMap& amap, const CMat& C1,
                                            const CMat& C2, const CVec& y,
                                            const EigRequest& req) {
  require(C1.rows() == amap.n1() && C1.cols() == amap.n1(),
          "weighted_nuclear_dual: C1 has wrong size");
  require(C2.rows() == amap.n2() && C2.cols() == amap.n2(),
          "weighted_nuclear_dual: C2 has wrong size");
  require(y.size() == amap.m(), "weighted_nuclear_dual: y has wrong size");

  const Eigen::PartialPivLU<CMat> lu1(C1), lu2(C2);
  require(std::abs(lu1.determinant()) > 1e-14 && std::abs(lu2.determinant()) > 1e-14,
          "weighted_nuclear_dual: singular weight matrix");
  const CMat c2_inv_h = lu2.inverse().adjoint().eval();
  const CMat c1_inv_h = lu1.inverse().adjoint().eval();

  const Eigen::Index n1 = amap.n1(), n2 = amap.n2();
  // Hermitian embedding [[0, N], [N^*, 0]] of N = C1^{-1} (A^* y) C2^{-*};
  // its rightmost eigenvalue is sigma_1(N).
  ApplyFn apply = [&](const CVec& v) -> CVec {
    CVec out(n1 + n2);
    out.head(n1) = lu1.solve(amap.adjoint_apply(y, c2_inv_h * v.tail(n2)));
    out.tail(n2) = lu2.solve(amap.adjoint_apply_h(y, c1_inv_h * v.head(n1)));
    return out;
  };

  WeightedNuclearResult out;
  out.eig = rightmost_eigpairs(apply, n1 + n2, req);
  out.value = out.eig.values[0];
  const Eigen::Index r = out.eig.vectors.cols();
  out.U = M_SQRT2 * out.eig.vectors.topRows(n1).leftCols(r);
  out.V = M_SQRT2 * out.eig.vectors.bottomRows(n2).leftCols(r);
  return out;
}

}  // namespace gauge
