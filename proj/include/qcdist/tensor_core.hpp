#pragma once

// Pointwise invariants of a metric paired with a 2-covariant tensor: the
// normalized trace, the determinant, the eigenvalues of g^{-1} T and the
// distortion function K^2 = Tr_g(T)^n / Det_g(T).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qcdist/linalg.hpp"

namespace qcdist {

/// (1/n) tr(g^{-1} T).
inline double invariant_trace(const SPDMatrix& g, const SymMatrix& t)
{
  check_same_dimension(g.dim(), t.dim());
  const auto llt = cholesky(g.matrix());
  return llt.solve(t.matrix()).trace() / g.dim();
}

/// det(g^{-1} T).
inline double invariant_det(const SPDMatrix& g, const SymMatrix& t)
{
  check_same_dimension(g.dim(), t.dim());
  const auto llt = cholesky(g.matrix());
  return llt.solve(t.matrix()).determinant();
}

/// Roots of det(g^{-1} T - lambda I) in ascending order, from the symmetric
/// eigenproblem of L^{-1} T L^{-T} where g = L L^T.
inline std::vector<double> distortion_eigenvalues(const SPDMatrix& g, const SymMatrix& t)
{
  check_same_dimension(g.dim(), t.dim());
  const Vector ev = sym_eig(whiten(cholesky(g.matrix()), t.matrix())).values;
  return {ev.data(), ev.data() + ev.size()};
}

/// Norm induced by h on 2-covariant tensors: tr(h^{-1} T^T h^{-1} T)^{1/2}.
inline double tensor_norm(const SPDMatrix& h, const Matrix& t)
{
  const auto llt = cholesky(h.matrix());
  const Matrix a = llt.solve(t.transpose());
  const Matrix b = llt.solve(t);
  return std::sqrt(std::max(0.0, (a * b).trace()));
}

struct DistortionValue
{
  int n = 0;
  /// +infinity when det_part <= 0.
  double k_squared = 0.0;
  double trace_part = 0.0;
  double det_part = 0.0;
  std::vector<double> eigenvalues;

  bool finite() const { return std::isfinite(k_squared); }
  double lambda_min() const { return eigenvalues.front(); }
  double lambda_max() const { return eigenvalues.back(); }
};

/// Distortion of a general symmetric T (possibly only semidefinite) against g.
inline DistortionValue distortion_value(const SPDMatrix& g, const SymMatrix& t)
{
  DistortionValue d;
  d.n = g.dim();
  d.trace_part = invariant_trace(g, t);
  d.det_part = invariant_det(g, t);
  d.eigenvalues = distortion_eigenvalues(g, t);
  if (d.det_part > 0.0)
    d.k_squared = std::pow(d.trace_part, d.n) / d.det_part;
  else
    d.k_squared = std::numeric_limits<double>::infinity();
  return d;
}

/// K^2(g, h) = Tr_g(h)^n / Det_g(h).
inline DistortionValue distortion_k2(const SPDMatrix& g, const SPDMatrix& h)
{
  check_same_dimension(g.dim(), h.dim());
  return distortion_value(g, h.sym());
}

/// Outcome of one inequality lhs <= rhs, compared with tol::rel / tol::abs.
struct InequalityCheck
{
  double lhs = 0.0;
  double rhs = 0.0;

  bool holds() const { return within_bound(lhs, rhs); }
  /// (rhs - lhs) / |rhs|; negative means violated.
  double margin() const
  {
    const double scale = std::max(std::abs(rhs), tol::abs);
    return (rhs - lhs) / scale;
  }
};

/// lambda_max / lambda_min <= n^n K^2.
inline InequalityCheck evaluate_ratio_bound(const DistortionValue& d)
{
  return {d.lambda_max() / d.lambda_min(), std::pow(double(d.n), d.n) * d.k_squared};
}

inline bool check_ratio_bound(const DistortionValue& d)
{
  return evaluate_ratio_bound(d).holds();
}

/// K^2(g, k) <= n^n K^2(g, h) K^2(h, k).
inline InequalityCheck evaluate_submultiplicativity(const SPDMatrix& g, const SPDMatrix& h,
                                                    const SPDMatrix& k)
{
  const int n = g.dim();
  const double lhs = distortion_k2(g, k).k_squared;
  const double rhs =
      std::pow(double(n), n) * distortion_k2(g, h).k_squared * distortion_k2(h, k).k_squared;
  return {lhs, rhs};
}

inline bool check_submultiplicativity(const SPDMatrix& g, const SPDMatrix& h, const SPDMatrix& k)
{
  return evaluate_submultiplicativity(g, h, k).holds();
}

/// K^2(g, h) <= K^2(h, g)^{n-1}.
inline InequalityCheck evaluate_inverse_bound(const SPDMatrix& g, const SPDMatrix& h)
{
  const int n = g.dim();
  return {distortion_k2(g, h).k_squared, std::pow(distortion_k2(h, g).k_squared, n - 1)};
}

inline bool check_inverse_bound(const SPDMatrix& g, const SPDMatrix& h)
{
  return evaluate_inverse_bound(g, h).holds();
}

/// c with h == c g when K^2(g, h) <= 1 + tol; empty otherwise.
inline std::optional<double> conformal_factor(const SPDMatrix& g, const SPDMatrix& h, double tol)
{
  const DistortionValue d = distortion_k2(g, h);
  if (!(d.k_squared <= 1.0 + tol))
    return std::nullopt;
  return d.trace_part;
}

}  // namespace qcdist
