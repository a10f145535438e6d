#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <string>

#include "normforge/common.hpp"
#include "normforge/log.hpp"

namespace normforge {

/// Dense symmetric matrix. Construction symmetrizes after checking that the
/// input is symmetric to within 1e-12 of its largest entry.
class SymMatrix {
 public:
  SymMatrix() = default;

  template <typename Derived>
  explicit SymMatrix(const Eigen::MatrixBase<Derived>& m) : data_(m) {
    if (data_.rows() != data_.cols()) {
      fail(ErrorKind::kDimensionMismatch, "SymMatrix: matrix is not square");
    }
    if (!data_.allFinite()) {
      fail(ErrorKind::kNonFinite, "SymMatrix: non-finite entry");
    }
    const double scale = data_.size() ? data_.cwiseAbs().maxCoeff() : 0.0;
    const double asym =
        data_.size() ? (data_ - data_.transpose()).cwiseAbs().maxCoeff() : 0.0;
    if (asym > 1e-12 * scale) {
      fail(ErrorKind::kInvalidArgument, "SymMatrix: input is not symmetric");
    }
    data_ = 0.5 * (data_ + data_.transpose()).eval();
  }

  static SymMatrix identity(Index n) {
    return SymMatrix(Matrix::Identity(n, n));
  }

  Index dim() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }

 private:
  Matrix data_;
};

/// A^T diag(w) A.
template <typename DerivedA, typename DerivedW>
SymMatrix gram(const Eigen::MatrixBase<DerivedA>& A,
               const Eigen::MatrixBase<DerivedW>& w) {
  if (w.size() != A.rows()) {
    fail(ErrorKind::kDimensionMismatch, "gram: weight length != rows(A)");
  }
  Matrix weighted = w.asDiagonal() * A;
  Matrix g = A.transpose() * weighted;
  return SymMatrix(0.5 * (g + g.transpose()));
}

template <typename DerivedA>
SymMatrix gram(const Eigen::MatrixBase<DerivedA>& A) {
  Matrix g = A.transpose() * A;
  return SymMatrix(0.5 * (g + g.transpose()));
}

/// Symmetric power S^exponent through the eigendecomposition. Eigenvalues
/// below relative_floor * lambda_max are clamped to that floor.
inline SymMatrix sym_power(const SymMatrix& S, double exponent,
                           double relative_floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S.matrix());
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::kNotConverged, "sym_power: eigendecomposition failed");
  }
  Vector lambda = eig.eigenvalues();
  const double lmax = lambda.size() ? std::max(lambda.maxCoeff(), 0.0) : 0.0;
  if (lmax <= 0.0) {
    fail(ErrorKind::kRankDeficient, "sym_power: matrix has no positive spectrum");
  }
  const double floor = relative_floor * lmax;
  Index clamped = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < floor) {
      lambda(i) = floor;
      ++clamped;
    }
    lambda(i) = std::pow(lambda(i), exponent);
  }
  if (clamped > 0) {
    log::debug("sym_power: clamped ", clamped, " eigenvalue(s) at ", floor);
  }
  const Matrix& V = eig.eigenvectors();
  return SymMatrix(Matrix(V * lambda.asDiagonal() * V.transpose()));
}

inline SymMatrix inv_sqrt(const SymMatrix& S, double relative_floor = 1e-12) {
  return sym_power(S, -0.5, relative_floor);
}

inline SymMatrix sqrt_psd(const SymMatrix& S, double relative_floor = 0.0) {
  return sym_power(S, 0.5, relative_floor);
}

/// Solves S x = b by Cholesky; S must be positive definite.
template <typename DerivedB>
Vector solve_spd(const SymMatrix& S, const Eigen::MatrixBase<DerivedB>& b) {
  if (b.size() != S.dim()) {
    fail(ErrorKind::kDimensionMismatch, "solve_spd: rhs length mismatch");
  }
  Eigen::LLT<Matrix> llt(S.matrix());
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::kRankDeficient, "solve_spd: matrix is not positive definite");
  }
  return llt.solve(b);
}

/// Row-major CSV; a leading non-numeric line is treated as a header.
Matrix read_csv_matrix(std::istream& in);
Matrix read_csv_matrix(const std::string& path);

}  // namespace normforge
