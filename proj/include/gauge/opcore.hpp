#pragma once

#include "gauge/types.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

namespace gauge {

struct OpCounts {
  std::uint64_t dft = 0;   // length-n Fourier transforms (forward or inverse)
  std::uint64_t dwt = 0;   // wavelet transforms
  std::uint64_t mul = 0;   // dense matrix-vector kernels

  std::uint64_t total() const { return dft + dwt + mul; }
  OpCounts operator-(const OpCounts& o) const {
    return {dft - o.dft, dwt - o.dwt, mul - o.mul};
  }
};

/// Monotone, thread-safe accumulators of costed kernel applications.
class OpCounter {
 public:
  void add_dft(std::uint64_t k) const { dft_.fetch_add(k, std::memory_order_relaxed); }
  void add_dwt(std::uint64_t k) const { dwt_.fetch_add(k, std::memory_order_relaxed); }
  void add_mul(std::uint64_t k) const { mul_.fetch_add(k, std::memory_order_relaxed); }

  OpCounts snapshot() const {
    return {dft_.load(std::memory_order_relaxed),
            dwt_.load(std::memory_order_relaxed),
            mul_.load(std::memory_order_relaxed)};
  }

 private:
  mutable std::atomic<std::uint64_t> dft_{0}, dwt_{0}, mul_{0};
};

/// Matrix-free linear measurement map A : H^n -> R^m, exposed through a
/// factored forward A(Z Z^*) and an adjoint action (A^* y) v. Maps are
/// immutable after construction; only the counters mutate.
class MeasurementMap {
 public:
  virtual ~MeasurementMap() = default;

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }

  /// A(Z Z^*) for a tall complex factor Z (n x r, 1 <= r <= n).
  RVec forward_factored(const CMat& Z) const {
    require(Z.rows() == n_, "forward_factored: factor has wrong row count");
    require(Z.cols() >= 1 && Z.cols() <= n_, "forward_factored: bad factor rank");
    return do_forward(Z);
  }

  /// (A^* y) v without materializing A^* y.
  CVec adjoint_apply(const RVec& y, const CVec& v) const {
    require(y.size() == m_, "adjoint_apply: measurement vector has wrong size");
    require(v.size() == n_, "adjoint_apply: vector has wrong size");
    return do_adjoint(y, v);
  }

  virtual const OpCounter& counter() const { return counter_; }

 protected:
  MeasurementMap(Eigen::Index n, Eigen::Index m) : n_(n), m_(m) {
    require(n >= 1 && m >= 1, "MeasurementMap: dimensions must be positive");
  }

  virtual RVec do_forward(const CMat& Z) const = 0;
  virtual CVec do_adjoint(const RVec& y, const CVec& v) const = 0;

 private:
  Eigen::Index n_, m_;
  OpCounter counter_;
};

using MapPtr = std::shared_ptr<const MeasurementMap>;

/// Rectangular measurement map A : C^{n1 x n2} -> C^m on lifted factored
/// arguments X = Z1 Z2^*.
class AsymmetricMap {
 public:
  virtual ~AsymmetricMap() = default;

  Eigen::Index n1() const { return n1_; }
  Eigen::Index n2() const { return n2_; }
  Eigen::Index m() const { return m_; }

  CVec forward_factored(const CMat& Z1, const CMat& Z2) const {
    require(Z1.rows() == n1_ && Z2.rows() == n2_, "asym forward: bad factor rows");
    require(Z1.cols() == Z2.cols() && Z1.cols() >= 1, "asym forward: rank mismatch");
    return do_forward(Z1, Z2);
  }

  /// (A^* y) v, v in C^{n2}.
  CVec adjoint_apply(const CVec& y, const CVec& v) const {
    require(y.size() == m_ && v.size() == n2_, "asym adjoint: size mismatch");
    return do_adjoint(y, v);
  }

  /// (A^* y)^* u, u in C^{n1}.
  CVec adjoint_apply_h(const CVec& y, const CVec& u) const {
    require(y.size() == m_ && u.size() == n1_, "asym adjoint_h: size mismatch");
    return do_adjoint_h(y, u);
  }

  const OpCounter& counter() const { return counter_; }

 protected:
  AsymmetricMap(Eigen::Index n1, Eigen::Index n2, Eigen::Index m)
      : n1_(n1), n2_(n2), m_(m) {
    require(n1 >= 1 && n2 >= 1 && m >= 1, "AsymmetricMap: bad dimensions");
  }

  virtual CVec do_forward(const CMat& Z1, const CMat& Z2) const = 0;
  virtual CVec do_adjoint(const CVec& y, const CVec& v) const = 0;
  virtual CVec do_adjoint_h(const CVec& y, const CVec& u) const = 0;

 private:
  Eigen::Index n1_, n2_, m_;
  OpCounter counter_;
};

using AsymMapPtr = std::shared_ptr<const AsymmetricMap>;

/// Dense map built from explicit Hermitian coefficient matrices A_k.
/// Used by tests as oracles and by the harness for "dense" descriptors;
/// it still implements the factored interface only.
class DenseHermitianMap : public MeasurementMap {
 public:
  explicit DenseHermitianMap(std::vector<CMat> mats);

  /// m random Hermitian coefficient matrices with complex normal entries.
  static std::shared_ptr<DenseHermitianMap> random(Eigen::Index n, Eigen::Index m,
                                                   std::uint64_t seed);
  /// Diagonal-extraction map, A(X) = diag(X) (m == n).
  static std::shared_ptr<DenseHermitianMap> diag_extraction(Eigen::Index n);

  const CMat& coefficient(Eigen::Index k) const { return mats_[k]; }

 protected:
  RVec do_forward(const CMat& Z) const override;
  CVec do_adjoint(const RVec& y, const CVec& v) const override;

 private:
  std::vector<CMat> mats_;
};

/// Dense rectangular map from explicit coefficient matrices, A(X)_k = <X, A_k>.
class DenseAsymmetricMap : public AsymmetricMap {
 public:
  explicit DenseAsymmetricMap(std::vector<CMat> mats);

  static std::shared_ptr<DenseAsymmetricMap> random(Eigen::Index n1, Eigen::Index n2,
                                                    Eigen::Index m, std::uint64_t seed);

  const CMat& coefficient(Eigen::Index k) const { return mats_[k]; }

 protected:
  CVec do_forward(const CMat& Z1, const CMat& Z2) const override;
  CVec do_adjoint(const CVec& y, const CVec& v) const override;
  CVec do_adjoint_h(const CVec& y, const CVec& u) const override;

 private:
  std::vector<CMat> mats_;
};

/// Hermitian embedding of an asymmetric map on side n1 + n2.
///
/// The embedded adjoint is the block matrix [[0, N], [N^*, 0]] with
/// N = A^*(y_re + i y_im), so its rightmost eigenvalue equals sigma_1(N).
/// The matching forward on a factor W = [Z1; Z2] is 2(Re w, Im w) with
/// w = A(Z1 Z2^*); the top-right block of an embedded solution therefore
/// carries X/2 of the rectangular solution X. When `real_measurements`
/// is set only the real parts are kept (m instead of 2m measurements).
class EmbeddedMap : public MeasurementMap {
 public:
  EmbeddedMap(AsymMapPtr amap, bool real_measurements);

  const AsymmetricMap& inner() const { return *amap_; }
  bool real_measurements() const { return real_; }

  /// Rectangular solution block from an embedded factor W = [Z1; Z2]:
  /// X = 2 Z1 Z2^*.
  CMat extract_offdiag(const CMat& W) const;

  const OpCounter& counter() const override { return amap_->counter(); }

 protected:
  RVec do_forward(const CMat& Z) const override;
  CVec do_adjoint(const RVec& y, const CVec& v) const override;

 private:
  CVec lift_y(const RVec& y) const;
  AsymMapPtr amap_;
  bool real_;
};

std::shared_ptr<const EmbeddedMap> embed_asymmetric(AsymMapPtr amap,
                                                    bool real_measurements = false);

}  // namespace gauge
