#pragma once

// The symmetric space P = SL(n)/SO(n) of unimodular SPD matrices with the
// metric tr(A^{-1} X A^{-1} Y). Matrix functions are evaluated through the
// symmetric eigendecomposition.

#include <cmath>
#include <vector>

#include "qcdist/linalg.hpp"
#include "qcdist/tensor_core.hpp"

namespace qcdist {

/// SPD matrix renormalized to det == 1 at construction.
class SPDPoint
{
public:
  SPDPoint() = default;

  explicit SPDPoint(const SPDMatrix& a)
  {
    const double det = a.matrix().determinant();
    if (!(det > 0.0))
      throw NotSPDError("SPD point with non-positive determinant");
    a_ = SPDMatrix(SymMatrix(a.matrix() / std::pow(det, 1.0 / a.dim())));
  }

  explicit SPDPoint(const Matrix& m) : SPDPoint(SPDMatrix(m)) {}

  static SPDPoint identity(int n) { return SPDPoint(Matrix::Identity(n, n)); }

  int dim() const { return a_.dim(); }
  const SPDMatrix& spd() const { return a_; }
  const Matrix& matrix() const { return a_.matrix(); }

  bool same_as(const SPDPoint& o) const
  {
    return dim() == o.dim() && matrix().isApprox(o.matrix(), 1e-12);
  }

private:
  SPDMatrix a_;
};

/// Tangent vector X at A with tr(A^{-1} X) == 0 (projected at construction).
class TangentVec
{
public:
  TangentVec(SPDPoint at, const SymMatrix& x) : at_(std::move(at))
  {
    check_same_dimension(at_.dim(), x.dim());
    const auto llt = cholesky(at_.matrix());
    const double tr = llt.solve(x.matrix()).trace() / at_.dim();
    x_ = SymMatrix(x.matrix() - tr * at_.matrix());
  }

  static TangentVec zero(const SPDPoint& at)
  {
    return TangentVec(at, SymMatrix(Matrix::Zero(at.dim(), at.dim())));
  }

  const SPDPoint& at() const { return at_; }
  const SymMatrix& x() const { return x_; }
  const Matrix& matrix() const { return x_.matrix(); }

  TangentVec scaled(double s) const { return TangentVec(at_, x_.scaled(s)); }

private:
  SPDPoint at_;
  SymMatrix x_;
};

namespace detail {

/// A^{1/2} and A^{-1/2} from one eigendecomposition.
struct SqrtPair
{
  Matrix half;
  Matrix inv_half;
};

inline SqrtPair sqrt_pair(const Matrix& a)
{
  const SymEig e = sym_eig(a);
  return {spectral_apply(e, [](double v) { return std::sqrt(v); }),
          spectral_apply(e, [](double v) { return 1.0 / std::sqrt(v); })};
}

inline Matrix congruence(const Matrix& s, const Matrix& x)
{
  Matrix r = s * x * s;
  return 0.5 * (r + r.transpose());
}

/// sum_i (log mu_i)^2 for the eigenvalues mu_i of a^{-1} b; both SPD.
inline double affine_distance(const Matrix& a, const Matrix& b)
{
  const Vector mu = sym_eig(whiten(cholesky(a), b)).values;
  double s = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
  {
    const double l = std::log(mu(i));
    s += l * l;
  }
  return std::sqrt(s);
}

}  // namespace detail

/// g^P_A(X, Y) = tr(A^{-1} X A^{-1} Y).
inline double fiber_inner(const TangentVec& x, const TangentVec& y)
{
  if (!x.at().same_as(y.at()))
    throw DomainError("tangent vectors attached to different base points");
  const auto s = detail::sqrt_pair(x.at().matrix());
  return frobenius_inner(detail::congruence(s.inv_half, x.matrix()),
                         detail::congruence(s.inv_half, y.matrix()));
}

/// A^{1/2} expm(A^{-1/2} X A^{-1/2}) A^{1/2}.
inline SPDPoint exp_map(const SPDPoint& at, const TangentVec& x)
{
  if (!x.at().same_as(at))
    throw DomainError("tangent vector not attached to the base point");
  const auto s = detail::sqrt_pair(at.matrix());
  const Matrix e = spectral_apply(detail::congruence(s.inv_half, x.matrix()),
                                  [](double v) { return std::exp(v); });
  return SPDPoint(detail::congruence(s.half, e));
}

/// A^{1/2} logm(A^{-1/2} B A^{-1/2}) A^{1/2}.
inline TangentVec log_map(const SPDPoint& at, const SPDPoint& b)
{
  check_same_dimension(at.dim(), b.dim());
  const auto s = detail::sqrt_pair(at.matrix());
  const Matrix l = spectral_apply(detail::congruence(s.inv_half, b.matrix()),
                                  [](double v) { return std::log(v); });
  return TangentVec(at, SymMatrix(detail::congruence(s.half, l)));
}

/// Point at parameter t on the geodesic from a (t = 0) to b (t = 1).
inline SPDPoint geodesic_point(const SPDPoint& a, const SPDPoint& b, double t)
{
  check_same_dimension(a.dim(), b.dim());
  const auto s = detail::sqrt_pair(a.matrix());
  const Matrix p = spectral_apply(detail::congruence(s.inv_half, b.matrix()),
                                  [t](double v) { return std::pow(v, t); });
  return SPDPoint(detail::congruence(s.half, p));
}

/// Geodesic distance ((log mu_1)^2 + ... + (log mu_n)^2)^{1/2}, mu the
/// eigenvalues of A^{-1} B.
inline double distance(const SPDPoint& a, const SPDPoint& b)
{
  check_same_dimension(a.dim(), b.dim());
  return detail::affine_distance(a.matrix(), b.matrix());
}

/// Z[A] = |det Z|^{-2/n} Z^T A Z.
inline SPDPoint gl_action(const Matrix& z, const SPDPoint& a)
{
  if (z.rows() != z.cols())
    throw DimensionError("GL(n) element must be square");
  check_same_dimension(z.rows(), a.dim());
  const double det = z.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-300)
    throw SingularError("gl_action with singular matrix");
  const int n = a.dim();
  const Matrix r = std::pow(std::abs(det), -2.0 / n) * (z.transpose() * a.matrix() * z);
  return SPDPoint(Matrix(0.5 * (r + r.transpose())));
}

struct Ball
{
  SPDPoint center;
  double radius = 0.0;
};

/// max_i d(center, p_i) - radius.
inline double ball_residual(const Ball& ball, const std::vector<SPDPoint>& points)
{
  double far = 0.0;
  for (const auto& p : points)
    far = std::max(far, distance(ball.center, p));
  return far - ball.radius;
}

}  // namespace qcdist
