#pragma once

#include <string>

#include <Eigen/Dense>

#include "llwlc/constraint.hpp"
#include "llwlc/errors.hpp"

namespace llwlc {

/// Orthogonal projector onto the null space of Cᵀ, the feasible space of the
/// homogeneous constraints. apply(b) solves min_y ‖Cy − b‖₂ once through a
/// Householder QR factorization computed at construction and returns the
/// residual b − C·y = (I − C(CᵀC)⁻¹Cᵀ) b without ever forming that matrix.
class Projector {
 public:
  Projector() = default; // l = 0, identity

  explicit Projector(const ConstraintMatrix& C) : n_(C.n), l_(C.l()) {
    if (l_ == 0) return;
    C_ = C.dense();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C_);
    // Thin Q factor: n×l with orthonormal columns spanning range(C).
    Q1_ = qr.householderQ() * Eigen::MatrixXd::Identity(n_, l_);
    const Eigen::VectorXd rdiag =
        qr.matrixQR().topLeftCorner(l_, l_).diagonal().cwiseAbs();
    const double rmax = rdiag.maxCoeff();
    for (int j = 0; j < l_; ++j)
      if (rdiag[j] <= 1e-12 * rmax)
        throw NumericalError("constraint matrix is numerically rank deficient at column " +
                             std::to_string(j) + "; assemble() should have pruned it");
  }

  int rows() const { return n_; }
  int l() const { return l_; }
  bool is_identity() const { return l_ == 0; }
  const Eigen::MatrixXd& constraint_matrix() const { return C_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& b) const {
    if (l_ == 0) return b;
    if (b.size() != n_)
      throw ValidationError("projector input has size " + std::to_string(b.size()) +
                            ", expected " + std::to_string(n_));
    return b - Q1_ * (Q1_.transpose() * b);
  }

 private:
  int n_ = 0;
  int l_ = 0;
  Eigen::MatrixXd C_;  // n×l, empty when l = 0
  Eigen::MatrixXd Q1_; // n×l orthonormal basis of range(C)
};

inline Projector build_projector(const ConstraintMatrix& C) { return Projector(C); }

} // namespace llwlc
