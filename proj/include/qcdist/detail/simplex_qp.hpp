#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace qcdist::detail {

/// Primal active-set solver for
///   minimize 0.5 w^T Q w - f^T w   subject to   w >= 0, sum(w) == 1
/// with Q symmetric positive definite. Small problems only (dense KKT solves).
inline Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& q, const Eigen::VectorXd& f,
                                        int max_iterations = 1000)
{
  using Eigen::Index;
  const Index n = f.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  if (n == 0)
    return w;

  // Best vertex as the starting point.
  Index start = 0;
  double best = 0.5 * q(0, 0) - f(0);
  for (Index i = 1; i < n; ++i)
  {
    const double v = 0.5 * q(i, i) - f(i);
    if (v < best)
    {
      best = v;
      start = i;
    }
  }
  w(start) = 1.0;
  std::vector<char> is_free(static_cast<std::size_t>(n), 0);
  is_free[static_cast<std::size_t>(start)] = 1;

  const double scale = 1.0 + q.diagonal().cwiseAbs().maxCoeff() + f.cwiseAbs().maxCoeff();

  for (int it = 0; it < max_iterations; ++it)
  {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (is_free[static_cast<std::size_t>(i)])
        idx.push_back(i);
    const Index k = static_cast<Index>(idx.size());

    // [Q_FF -1; 1^T 0] [x; nu] = [f_F; 1]
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (Index a = 0; a < k; ++a)
    {
      for (Index b = 0; b < k; ++b)
        kkt(a, b) = q(idx[a], idx[b]);
      kkt(a, k) = -1.0;
      kkt(k, a) = 1.0;
      rhs(a) = f(idx[a]);
    }
    rhs(k) = 1.0;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const double nu = sol(k);

    Eigen::VectorXd step(k);
    for (Index a = 0; a < k; ++a)
      step(a) = sol(a) - w(idx[a]);

    if (step.cwiseAbs().maxCoeff() <= 1e-15)
    {
      // Stationary on the free set: release the bound with the most negative multiplier.
      const Eigen::VectorXd grad = q * w - f;
      Index release = -1;
      double most_negative = -1e-14 * scale;
      for (Index i = 0; i < n; ++i)
      {
        if (is_free[static_cast<std::size_t>(i)])
          continue;
        const double lambda = grad(i) - nu;
        if (lambda < most_negative)
        {
          most_negative = lambda;
          release = i;
        }
      }
      if (release < 0)
        return w / w.sum();
      is_free[static_cast<std::size_t>(release)] = 1;
      continue;
    }

    double alpha = 1.0;
    Index blocking = -1;
    for (Index a = 0; a < k; ++a)
    {
      if (step(a) < 0.0)
      {
        const double ratio = -w(idx[a]) / step(a);
        if (ratio < alpha)
        {
          alpha = ratio;
          blocking = idx[a];
        }
      }
    }
    for (Index a = 0; a < k; ++a)
      w(idx[a]) += alpha * step(a);
    if (blocking >= 0)
    {
      w(blocking) = 0.0;
      is_free[static_cast<std::size_t>(blocking)] = 0;
    }
  }
  return w / w.sum();
}

}  // namespace qcdist::detail
