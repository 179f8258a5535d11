#pragma once

// Minimal enclosing geodesic ball of a finite subset of P.
//
// A Riemannian Badoiu-Clarkson phase gives a warm start; a sequential
// quadratic programming phase then solves min_c max_i d(c, p_i)^2 / 2 to
// near machine precision. Each SQP step works in normal coordinates at the
// current center c, where the gradient of d(., p)^2 / 2 is -log_c(p) and its
// Hessian is known in closed form:
//   H(X) = U [ (U^T X U)_jk * h((l_j - l_k) / 2) ] U^T,   h(s) = s coth s,
// with log_c(p) = U diag(l) U^T.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qcdist/detail/simplex_qp.hpp"
#include "qcdist/spd_manifold.hpp"

namespace qcdist {

struct SolverConfig
{
  /// Radius tolerance; the SQP phase stops once its step is below tol / 1000.
  double tol = 1e-9;
  int max_iterations = 100000;
  /// Badoiu-Clarkson stops when the radius fell by less than tol over this many iterations.
  int window = 100;
  int warm_start_iterations = 100;
};

struct BallResult
{
  SPDPoint center;
  double radius = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;

  Ball ball() const { return {center, radius}; }
};

namespace detail {

/// Frobenius-orthonormal basis of the trace-free symmetric n x n matrices.
inline std::vector<Matrix> tracefree_basis(int n)
{
  std::vector<Matrix> basis;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
    {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
      basis.push_back(e);
    }
  // Helmert contrasts for the diagonal part.
  for (int k = 1; k < n; ++k)
  {
    Matrix e = Matrix::Zero(n, n);
    const double s = 1.0 / std::sqrt(double(k) * (k + 1));
    for (int i = 0; i < k; ++i)
      e(i, i) = s;
    e(k, k) = -k * s;
    basis.push_back(e);
  }
  return basis;
}

inline double s_coth_s(double s)
{
  if (std::abs(s) < 1e-6)
    return 1.0 + s * s / 3.0;
  return s / std::tanh(s);
}

/// Hessian of d(., p)^2 / 2 at the identity in normal coordinates, where
/// `log_eig` is the eigendecomposition of log(p).
inline Matrix half_sq_distance_hessian(const SymEig& log_eig, const std::vector<Matrix>& basis)
{
  const Eigen::Index n = log_eig.values.size();
  Matrix weight(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      weight(j, k) = s_coth_s(0.5 * (log_eig.values(j) - log_eig.values(k)));

  const auto m = static_cast<Eigen::Index>(basis.size());
  const Matrix& u = log_eig.vectors;
  std::vector<Matrix> rotated;
  rotated.reserve(basis.size());
  for (const auto& e : basis)
    rotated.push_back(u.transpose() * e * u);

  Matrix hess(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
  {
    const Matrix image = rotated[a].cwiseProduct(weight);
    for (Eigen::Index b = a; b < m; ++b)
      hess(a, b) = hess(b, a) = frobenius_inner(rotated[b], image);
  }
  return hess;
}

inline Vector to_coords(const Matrix& x, const std::vector<Matrix>& basis)
{
  Vector c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a)
    c(static_cast<Eigen::Index>(a)) = frobenius_inner(basis[a], x);
  return c;
}

inline Matrix from_coords(const Vector& c, const std::vector<Matrix>& basis)
{
  Matrix x = Matrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t a = 0; a < basis.size(); ++a)
    x += c(static_cast<Eigen::Index>(a)) * basis[a];
  return x;
}

inline double max_half_sq_distance(const Matrix& c, const std::vector<SPDPoint>& points)
{
  double worst = 0.0;
  for (const auto& p : points)
  {
    const double d = affine_distance(c, p.matrix());
    worst = std::max(worst, 0.5 * d * d);
  }
  return worst;
}

}  // namespace detail

inline BallResult minimal_enclosing_ball(const std::vector<SPDPoint>& points,
                                         const SolverConfig& cfg = {})
{
  if (points.empty())
    throw DomainError("minimal_enclosing_ball needs at least one point");
  const int n = points.front().dim();
  for (const auto& p : points)
    check_same_dimension(n, p.dim());

  auto farthest = [&](const SPDPoint& c) {
    std::size_t idx = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
      const double d = distance(c, points[i]);
      if (d > far)
      {
        far = d;
        idx = i;
      }
    }
    return std::pair{idx, far};
  };

  BallResult out;
  SPDPoint c = points.front();
  int it = 0;

  // Badoiu-Clarkson: c <- exp_c(log_c(f) / (k + 1)), f the farthest point.
  std::vector<double> history;
  for (; it < std::min(cfg.warm_start_iterations, cfg.max_iterations); ++it)
  {
    const auto [f, r] = farthest(c);
    history.push_back(r);
    if (r == 0.0)
      break;
    const auto h = history.size();
    if (h > static_cast<std::size_t>(cfg.window) &&
        history[h - 1 - static_cast<std::size_t>(cfg.window)] - r < cfg.tol)
      break;
    c = geodesic_point(c, points[f], 1.0 / (it + 1));
  }

  const auto basis = detail::tracefree_basis(n);
  const auto m = static_cast<Eigen::Index>(basis.size());
  const auto count = static_cast<Eigen::Index>(points.size());
  const double step_tol = 1e-3 * cfg.tol;

  Vector weights = Vector::Zero(count);
  weights(static_cast<Eigen::Index>(farthest(c).first)) = 1.0;

  for (; it < cfg.max_iterations; ++it)
  {
    const auto frame = detail::sqrt_pair(c.matrix());
    Matrix grads(m, count);
    Vector half_sq(count);
    Matrix b = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < count; ++i)
    {
      const Matrix local = detail::congruence(frame.inv_half, points[static_cast<std::size_t>(i)].matrix());
      SymEig e = sym_eig(local);
      e.values = e.values.array().log();
      const Matrix lg = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
      grads.col(i) = detail::to_coords(lg, basis);
      half_sq(i) = 0.5 * e.values.squaredNorm();
      if (weights(i) > 0.0)
        b += weights(i) * detail::half_sq_distance_hessian(e, basis);
    }
    if (weights.sum() <= 0.0)
      b = Matrix::Identity(m, m);
    const double current = half_sq.maxCoeff();

    const Eigen::LLT<Matrix> b_llt(b);
    const Matrix binv_g = b_llt.solve(grads);
    Matrix q = grads.transpose() * binv_g;
    q = 0.5 * (q + q.transpose());
    q.diagonal().array() += 1e-13 * (1.0 + q.diagonal().maxCoeff());
    const Vector w = detail::solve_simplex_qp(q, half_sq);
    const Vector v = binv_g * w;

    if (v.norm() <= step_tol)
    {
      out.converged = true;
      break;
    }

    const double model = (half_sq - grads.transpose() * v).maxCoeff() + 0.5 * v.dot(b * v);
    const double predicted = std::max(0.0, current - model);
    const Matrix step = detail::from_coords(v, basis);

    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5)
    {
      const Matrix trial = detail::congruence(
          frame.half, spectral_apply(Matrix(alpha * step), [](double s) { return std::exp(s); }));
      const double value = detail::max_half_sq_distance(trial, points);
      const bool armijo = value <= current - 1e-4 * alpha * predicted;
      const bool flat = alpha == 1.0 && value <= current + 1e-14 * (1.0 + current);
      if (armijo || flat)
      {
        c = SPDPoint(trial);
        accepted = true;
        break;
      }
    }
    weights = w;
    if (!accepted)
    {
      out.converged = v.norm() <= cfg.tol;
      break;
    }
  }

  out.center = c;
  out.iterations = it;
  out.radius = farthest(c).second;
  out.residual = ball_residual(out.ball(), points);
  return out;
}

}  // namespace qcdist
