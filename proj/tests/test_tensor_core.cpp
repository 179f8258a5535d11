#include <gtest/gtest.h>

#include <cmath>

#include "qcdist/tensor_core.hpp"
#include "test_support.hpp"

using namespace qcdist;
using qcdist::testing::Rng;

namespace {

SPDMatrix diag(std::initializer_list<double> d)
{
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d)
    v(i++) = x;
  return SPDMatrix(Matrix(v.asDiagonal()));
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(SymMatrix, MirrorsUpperTriangle)
{
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const SymMatrix s(m);
  EXPECT_EQ(s(1, 0), 2.0);
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(SymMatrix, RejectsBadDimensions)
{
  EXPECT_THROW(SymMatrix(Matrix::Identity(1, 1)), DimensionError);
  EXPECT_THROW(SymMatrix(Matrix::Identity(9, 9)), DimensionError);
  EXPECT_THROW(SymMatrix(Matrix::Zero(2, 3)), DimensionError);
}

TEST(SPDMatrix, AdmissionTolerance)
{
  EXPECT_NO_THROW(diag({1.0, 1e-11}));
  EXPECT_THROW(diag({1.0, 1e-13}), NotSPDError);
  EXPECT_THROW(diag({1.0, -1.0}), NotSPDError);
}

TEST(InvariantTrace, Examples)
{
  EXPECT_DOUBLE_EQ(invariant_trace(SPDMatrix::identity(2), SymMatrix::identity(2)), 1.0);
  EXPECT_DOUBLE_EQ(invariant_trace(SPDMatrix::identity(2), diag({4, 1})), 2.5);
  EXPECT_DOUBLE_EQ(invariant_trace(diag({2, 2}), diag({4, 1})), 1.25);
  EXPECT_THROW(invariant_trace(SPDMatrix::identity(2), SymMatrix::identity(3)), DimensionError);
}

TEST(InvariantDet, Examples)
{
  EXPECT_DOUBLE_EQ(invariant_det(SPDMatrix::identity(2), SymMatrix::identity(2)), 1.0);
  EXPECT_NEAR(invariant_det(SPDMatrix::identity(2), diag({4, 1})), 4.0, 1e-14);
  EXPECT_NEAR(invariant_det(diag({2, 2}), diag({4, 1})), 1.0, 1e-14);
  EXPECT_THROW(invariant_det(SPDMatrix::identity(3), SymMatrix::identity(2)), DimensionError);
}

TEST(DistortionEigenvalues, Examples)
{
  const auto ev = distortion_eigenvalues(SPDMatrix::identity(2), diag({4, 1}));
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0], 1.0, 1e-14);
  EXPECT_NEAR(ev[1], 4.0, 1e-14);

  Rng rng(7);
  const SPDMatrix g = qcdist::testing::random_spd(3, rng);
  for (double l : distortion_eigenvalues(g, g))
    EXPECT_NEAR(l, 1.0, 1e-12);
}

TEST(DistortionEigenvalues, AgreeWithCompanionOracle)
{
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial)
  {
    const SPDMatrix g = qcdist::testing::random_spd(3, rng, 0.5);
    const SPDMatrix t = qcdist::testing::random_spd(3, rng, 0.5);
    const auto ev = distortion_eigenvalues(g, t);
    const Matrix m = g.matrix().inverse() * t.matrix();
    const auto oracle = qcdist::testing::companion_eigenvalues(m);
    for (int i = 0; i < 3; ++i)
      EXPECT_NEAR(ev[static_cast<std::size_t>(i)], oracle[static_cast<std::size_t>(i)],
                  1e-10 * std::max(1.0, oracle[2]));
  }
}

TEST(DistortionK2, Examples)
{
  Rng rng(3);
  const SPDMatrix g = qcdist::testing::random_spd(4, rng);
  EXPECT_NEAR(distortion_k2(g, g).k_squared, 1.0, 1e-12);

  const auto d = distortion_k2(SPDMatrix::identity(2), diag({4, 1}));
  EXPECT_NEAR(d.k_squared, 25.0 / 16.0, 1e-14);

  // Two-dimensional reduction K^2 = (1 + r)^2 / (4 r) for eigenvalue ratio r.
  for (double r : {1.0, 2.0, 4.0, 10.0, 123.0})
  {
    const double expected = (1 + r) * (1 + r) / (4 * r);
    EXPECT_NEAR(distortion_k2(SPDMatrix::identity(2), diag({r, 1})).k_squared, expected,
                1e-13 * expected);
  }
}

TEST(DistortionK2, ConformalInvariance)
{
  Rng rng(5);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDMatrix g = qcdist::testing::random_spd(n, rng);
    const SPDMatrix h = qcdist::testing::random_spd(n, rng);
    const double base = distortion_k2(g, h).k_squared;
    const double a = scale(rng);
    const double b = scale(rng);
    EXPECT_LE(rel_diff(distortion_k2(g.scaled(a), h.scaled(b)).k_squared, base), 1e-12);
  }
}

TEST(DistortionValue, SingularTensorIsInfiniteNotNaN)
{
  Matrix t(2, 2);
  t << 1, 0, 0, 0;
  const auto d = distortion_value(SPDMatrix::identity(2), SymMatrix(t));
  EXPECT_FALSE(d.finite());
  EXPECT_TRUE(std::isinf(d.k_squared));
  EXPECT_FALSE(std::isnan(d.k_squared));
}

TEST(TensorCoreProperties, CongruenceInvariance)
{
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDMatrix g = qcdist::testing::random_spd(n, rng, 0.5);
    const SPDMatrix h = qcdist::testing::random_spd(n, rng, 0.5);
    const SymMatrix t = qcdist::testing::random_symmetric(n, rng);
    const Matrix p = qcdist::testing::random_invertible(n, rng, 1e3);
    const SPDMatrix gp(Matrix(p.transpose() * g.matrix() * p));
    const SPDMatrix hp(Matrix(p.transpose() * h.matrix() * p));
    const SymMatrix tp(Matrix(p.transpose() * t.matrix() * p));

    const double tr = invariant_trace(g, t);
    EXPECT_NEAR(invariant_trace(gp, tp), tr, 1e-9 * std::max(1.0, std::abs(tr)));
    const double det = invariant_det(g, t);
    EXPECT_NEAR(invariant_det(gp, tp), det, 1e-9 * std::max(1.0, std::abs(det)));

    const auto ev = distortion_eigenvalues(g, h);
    const auto evp = distortion_eigenvalues(gp, hp);
    for (int i = 0; i < n; ++i)
      EXPECT_LE(rel_diff(evp[static_cast<std::size_t>(i)], ev[static_cast<std::size_t>(i)]), 1e-9);
    EXPECT_LE(rel_diff(distortion_k2(gp, hp).k_squared, distortion_k2(g, h).k_squared), 1e-9);
  }
}

TEST(TensorCoreProperties, AmGmFloorAndEigenvalueConsistency)
{
  Rng rng(23);
  for (int trial = 0; trial < 3000; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDMatrix g = qcdist::testing::random_spd(n, rng, 1.5);
    const SPDMatrix h = qcdist::testing::random_spd(n, rng, 1.5);
    const auto d = distortion_k2(g, h);
    EXPECT_GE(d.k_squared, 1.0 - 1e-12);
    EXPECT_NEAR(d.k_squared, std::pow(d.trace_part, n) / d.det_part, 1e-12 * d.k_squared);
    double prod = 1.0;
    double sum = 0.0;
    for (double l : d.eigenvalues)
    {
      prod *= l;
      sum += l;
    }
    EXPECT_LE(rel_diff(prod, d.det_part), 1e-10);
    EXPECT_LE(rel_diff(sum / n, d.trace_part), 1e-10);
  }
}

TEST(TensorCoreProperties, ConformalRigidity)
{
  Rng rng(29);
  std::uniform_real_distribution<double> cd(0.0, 10.0);
  for (int trial = 0; trial < 500; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDMatrix g = qcdist::testing::random_spd(n, rng);
    const double c = cd(rng) + 1e-3;
    const SPDMatrix h = g.scaled(c);
    const auto d = distortion_k2(g, h);
    ASSERT_LE(d.k_squared, 1.0 + 1e-12);
    const Matrix dev = h.matrix() / d.trace_part - g.matrix();
    EXPECT_LE(dev.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(RatioBound, Examples)
{
  DistortionValue d;
  d.n = 2;
  d.eigenvalues = {1.0, 1.0};
  d.k_squared = 1.0;
  EXPECT_TRUE(check_ratio_bound(d));
  d.eigenvalues = {1.0, 4.0};
  d.k_squared = 25.0 / 16.0;
  EXPECT_TRUE(check_ratio_bound(d));
  EXPECT_DOUBLE_EQ(evaluate_ratio_bound(d).rhs, 6.25);
}

TEST(Submultiplicativity, Examples)
{
  Rng rng(31);
  const SPDMatrix g = qcdist::testing::random_spd(3, rng);
  EXPECT_TRUE(check_submultiplicativity(g, g, g));
  const auto c = evaluate_submultiplicativity(g, g, g);
  EXPECT_NEAR(c.rhs, 27.0, 1e-10);

  // K^2(I, diag(1,4)) = 25/16 <= 4 * 25/16 * K^2(diag(4,1), diag(1,4)).
  const auto e = evaluate_submultiplicativity(SPDMatrix::identity(2), diag({4, 1}), diag({1, 4}));
  EXPECT_NEAR(e.lhs, 25.0 / 16.0, 1e-14);
  // K^2(diag(4,1), diag(1,4)): eigenvalues {1/4, 4}, ratio 16 -> 17^2 / 64.
  EXPECT_NEAR(e.rhs, 4.0 * 25.0 / 16.0 * 289.0 / 64.0, 1e-12);
  EXPECT_TRUE(e.holds());
}

TEST(InverseBound, Examples)
{
  Rng rng(37);
  const SPDMatrix g = qcdist::testing::random_spd(3, rng);
  EXPECT_TRUE(check_inverse_bound(g, g));
  // n = 2: K^2(g, h) == K^2(h, g).
  for (int trial = 0; trial < 100; ++trial)
  {
    const SPDMatrix a = qcdist::testing::random_spd(2, rng);
    const SPDMatrix b = qcdist::testing::random_spd(2, rng);
    const auto c = evaluate_inverse_bound(a, b);
    EXPECT_LE(rel_diff(c.lhs, c.rhs), 1e-12);
    EXPECT_TRUE(c.holds());
  }
}

TEST(InequalitySweeps, RandomInputsNeverViolate)
{
  Rng rng(41);
  for (int trial = 0; trial < 3000; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDMatrix g = qcdist::testing::random_spd(n, rng, 1.5);
    const SPDMatrix h = qcdist::testing::random_spd(n, rng, 1.5);
    const SPDMatrix k = qcdist::testing::random_spd(n, rng, 1.5);
    ASSERT_TRUE(check_ratio_bound(distortion_k2(g, h)));
    ASSERT_TRUE(check_submultiplicativity(g, h, k));
    ASSERT_TRUE(check_inverse_bound(g, h));
  }
}

TEST(ConformalFactor, Examples)
{
  Rng rng(43);
  const SPDMatrix g = qcdist::testing::random_spd(3, rng);
  const auto c = conformal_factor(g, g.scaled(3.0), 1e-12);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, 3.0, 1e-12);

  EXPECT_FALSE(conformal_factor(SPDMatrix::identity(2), diag({4, 1}), 1e-9).has_value());

  std::uniform_real_distribution<double> cd(1e-3, 10.0);
  for (int trial = 0; trial < 200; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDMatrix gr = qcdist::testing::random_spd(n, rng);
    const double cr = cd(rng);
    const SPDMatrix hr = gr.scaled(cr);
    const auto got = conformal_factor(gr, hr, 1e-12);
    ASSERT_TRUE(got.has_value());
    EXPECT_NEAR(*got, cr, 1e-12 * std::max(1.0, cr));
    EXPECT_LE((hr.matrix() - *got * gr.matrix()).norm(), 1e-12 * hr.matrix().norm());
  }
}

TEST(TensorNorm, MatchesFrobeniusForIdentityMetric)
{
  Matrix t(2, 2);
  t << 2, 0, 0, -2;
  EXPECT_NEAR(tensor_norm(SPDMatrix::identity(2), t), std::sqrt(8.0), 1e-14);
}
