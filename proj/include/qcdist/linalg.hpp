#pragma once

// Small dense symmetric matrices and spectral matrix functions.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "qcdist/errors.hpp"

namespace qcdist {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kMinDimension = 2;
inline constexpr int kMaxDimension = 8;

namespace tol {
/// SPD admission: smallest eigenvalue must exceed this multiple of the largest.
inline constexpr double spd = 1e-12;
/// Relative slack for every inequality certificate.
inline constexpr double rel = 1e-9;
/// Absolute slack for every inequality certificate.
inline constexpr double abs = 1e-12;
}  // namespace tol

/// lhs <= rhs up to the certificate slack.
inline bool within_bound(double lhs, double rhs)
{
  return lhs <= rhs * (1.0 + tol::rel) + tol::abs;
}

inline void check_dimension(Eigen::Index n)
{
  if (n < kMinDimension || n > kMaxDimension)
    throw DimensionError("dimension " + std::to_string(n) + " outside [2, 8]");
}

inline void check_same_dimension(Eigen::Index a, Eigen::Index b)
{
  if (a != b)
    throw DimensionError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

/// A real symmetric n x n matrix. The upper triangle of the input is kept and
/// mirrored, so entries(i, j) == entries(j, i) holds bit for bit.
class SymMatrix
{
public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& m)
  {
    if (m.rows() != m.cols())
      throw DimensionError("symmetric matrix must be square");
    check_dimension(m.rows());
    m_ = m.triangularView<Eigen::Upper>();
    m_.triangularView<Eigen::StrictlyLower>() = m_.transpose();
  }

  static SymMatrix identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMatrix scaled(double s) const { return SymMatrix(s * m_); }

private:
  Matrix m_;
};

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
struct SymEig
{
  Vector values;
  Matrix vectors;
};

inline SymEig sym_eig(const Matrix& s)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success)
    throw NumericalError("symmetric eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// U f(Lambda) U^T for a symmetric matrix with eigendecomposition U Lambda U^T.
template <class F>
Matrix spectral_apply(const SymEig& e, F&& f)
{
  Vector fv = e.values.unaryExpr(std::forward<F>(f));
  Matrix r = e.vectors * fv.asDiagonal() * e.vectors.transpose();
  return 0.5 * (r + r.transpose());
}

template <class F>
Matrix spectral_apply(const Matrix& s, F&& f)
{
  return spectral_apply(sym_eig(s), std::forward<F>(f));
}

/// A symmetric positive definite matrix: lambda_min > tol::spd * lambda_max.
class SPDMatrix
{
public:
  SPDMatrix() = default;

  explicit SPDMatrix(const SymMatrix& s) : base_(s)
  {
    const Vector ev = sym_eig(s.matrix()).values;
    const double lo = ev(0);
    const double hi = ev(ev.size() - 1);
    if (!(lo > 0.0) || !(lo > tol::spd * hi) || !std::isfinite(hi))
      throw NotSPDError("matrix is not symmetric positive definite (eigenvalues " +
                        std::to_string(lo) + " .. " + std::to_string(hi) + ")");
  }

  explicit SPDMatrix(const Matrix& m) : SPDMatrix(SymMatrix(m)) {}

  static SPDMatrix identity(int n) { return SPDMatrix(SymMatrix::identity(n)); }

  int dim() const { return base_.dim(); }
  const SymMatrix& sym() const { return base_; }
  const Matrix& matrix() const { return base_.matrix(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return base_(i, j); }

  operator const SymMatrix&() const { return base_; }  // NOLINT(google-explicit-constructor)

  SPDMatrix scaled(double s) const { return SPDMatrix(base_.scaled(s)); }

private:
  SymMatrix base_;
};

/// Cholesky factor of an SPD matrix; throws if factorization fails.
inline Eigen::LLT<Matrix> cholesky(const Matrix& g)
{
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    throw NotSPDError("Cholesky factorization failed");
  return llt;
}

/// L^{-1} T L^{-T} for g = L L^T; the symmetric representative of g^{-1} T.
inline Matrix whiten(const Eigen::LLT<Matrix>& llt, const Matrix& t)
{
  const auto l = llt.matrixL();
  Matrix w = l.solve(t);
  w = l.solve(w.transpose()).transpose();
  return 0.5 * (w + w.transpose());
}

inline double frobenius_inner(const Matrix& a, const Matrix& b)
{
  return (a.array() * b.array()).sum();
}

}  // namespace qcdist
