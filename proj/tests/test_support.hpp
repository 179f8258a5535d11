#pragma once

// Random generators and independent oracles shared by the test suites.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qcdist/linalg.hpp"

namespace qcdist::testing {

using Rng = std::mt19937_64;

inline Matrix random_gaussian(int rows, int cols, Rng& rng)
{
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = nd(rng);
  return m;
}

inline Matrix random_orthogonal(int n, Rng& rng)
{
  Eigen::HouseholderQR<Matrix> qr(random_gaussian(n, n, rng));
  return qr.householderQ();
}

/// Q diag(exp(spread * N(0, 1))) Q^T.
inline SPDMatrix random_spd(int n, Rng& rng, double spread = 1.0)
{
  std::normal_distribution<double> nd(0.0, spread);
  const Matrix q = random_orthogonal(n, rng);
  Vector d(n);
  for (int i = 0; i < n; ++i)
    d(i) = std::exp(nd(rng));
  return SPDMatrix(Matrix(q * d.asDiagonal() * q.transpose()));
}

/// Invertible matrix whose condition number is log-uniform in [1, max_cond].
inline Matrix random_invertible(int n, Rng& rng, double max_cond)
{
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const double cond = std::exp(ud(rng) * std::log(max_cond));
  const Matrix u = random_orthogonal(n, rng);
  const Matrix v = random_orthogonal(n, rng);
  Vector s(n);
  for (int i = 0; i < n; ++i)
    s(i) = std::exp(ud(rng) * std::log(cond));
  s(0) = 1.0;
  s(n - 1) = cond;
  return u * s.asDiagonal() * v.transpose();
}

inline SymMatrix random_symmetric(int n, Rng& rng)
{
  const Matrix a = random_gaussian(n, n, rng);
  return SymMatrix(Matrix(0.5 * (a + a.transpose())));
}

/// Eigenvalues of M from the companion matrix of its characteristic
/// polynomial (Faddeev-LeVerrier coefficients), real parts sorted ascending.
inline std::vector<double> companion_eigenvalues(const Matrix& m)
{
  const int n = static_cast<int>(m.rows());
  // p(x) = x^n + c_{n-1} x^{n-1} + ... + c_0
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Matrix mk = Matrix::Zero(n, n);
  const Matrix id = Matrix::Identity(n, n);
  for (int k = 1; k <= n; ++k)
  {
    mk = m * (mk + c[static_cast<std::size_t>(n - k + 1)] * id);
    c[static_cast<std::size_t>(n - k)] = -mk.trace() / k;
  }
  Matrix comp = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i)
    comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i)
    comp(i, n - 1) = -c[static_cast<std::size_t>(i)];
  Eigen::EigenSolver<Matrix> es(comp);
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(es.eigenvalues()(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qcdist::testing
