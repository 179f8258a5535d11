#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "qcdist/meb.hpp"
#include "qcdist/spd_manifold.hpp"
#include "test_support.hpp"

using namespace qcdist;
using qcdist::testing::Rng;

namespace {

SPDPoint diag_point(std::initializer_list<double> d)
{
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d)
    v(i++) = x;
  return SPDPoint(Matrix(v.asDiagonal()));
}

SPDPoint random_point(int n, Rng& rng, double spread = 1.0)
{
  return SPDPoint(qcdist::testing::random_spd(n, rng, spread));
}

TangentVec random_tangent(const SPDPoint& at, Rng& rng, double norm)
{
  TangentVec x(at, qcdist::testing::random_symmetric(at.dim(), rng));
  const double len = std::sqrt(fiber_inner(x, x));
  return x.scaled(norm / len);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(SPDPoint, RenormalizesToUnitDeterminant)
{
  Rng rng(1);
  for (int n = 2; n <= 4; ++n)
  {
    const SPDPoint p(qcdist::testing::random_spd(n, rng, 2.0));
    EXPECT_NEAR(p.matrix().determinant(), 1.0, 1e-10);
  }
}

TEST(TangentVec, ProjectsOntoTraceCondition)
{
  Rng rng(2);
  const SPDPoint a = random_point(3, rng);
  const TangentVec x(a, qcdist::testing::random_symmetric(3, rng));
  EXPECT_NEAR((a.matrix().inverse() * x.matrix()).trace(), 0.0, 1e-10);
}

TEST(FiberInner, Examples)
{
  Matrix d(2, 2);
  d << 1, 0, 0, -1;
  const SPDPoint id = SPDPoint::identity(2);
  const TangentVec x(id, SymMatrix(d));
  EXPECT_NEAR(fiber_inner(x, x), 2.0, 1e-15);

  Rng rng(3);
  const SPDPoint a = random_point(3, rng);
  EXPECT_EQ(fiber_inner(TangentVec::zero(a), TangentVec::zero(a)), 0.0);
}

TEST(FiberInner, MatchesExplicitInverseOracle)
{
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDPoint a = random_point(n, rng);
    const TangentVec x(a, qcdist::testing::random_symmetric(n, rng));
    const TangentVec y(a, qcdist::testing::random_symmetric(n, rng));
    const Matrix ai = a.matrix().inverse();
    const double oracle = (ai * x.matrix() * ai * y.matrix()).trace();
    EXPECT_NEAR(fiber_inner(x, y), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
    EXPECT_NEAR(fiber_inner(x, y), fiber_inner(y, x), 1e-12 * std::max(1.0, std::abs(oracle)));
    EXPECT_GT(fiber_inner(x, x), 0.0);
  }
}

TEST(FiberInner, BasePointMismatch)
{
  Rng rng(5);
  const SPDPoint a = random_point(2, rng);
  const SPDPoint b = random_point(2, rng);
  EXPECT_THROW(fiber_inner(TangentVec::zero(a), TangentVec::zero(b)), DomainError);
}

TEST(ExpLog, Examples)
{
  Rng rng(6);
  const SPDPoint a = random_point(3, rng);
  EXPECT_LE(max_abs(exp_map(a, TangentVec::zero(a)).matrix() - a.matrix()), 1e-12);
  EXPECT_LE(max_abs(log_map(a, a).matrix()), 1e-12);

  const double t = 0.7;
  Matrix d(2, 2);
  d << t, 0, 0, -t;
  const SPDPoint e = exp_map(SPDPoint::identity(2), TangentVec(SPDPoint::identity(2), SymMatrix(d)));
  EXPECT_NEAR(e.matrix()(0, 0), std::exp(t), 1e-14);
  EXPECT_NEAR(e.matrix()(1, 1), std::exp(-t), 1e-14);

  const TangentVec l = log_map(SPDPoint::identity(2), diag_point({std::exp(1.0), std::exp(-1.0)}));
  EXPECT_NEAR(l.matrix()(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(l.matrix()(1, 1), -1.0, 1e-14);
  EXPECT_NEAR(l.matrix()(0, 1), 0.0, 1e-14);
}

TEST(ExpLog, RoundTrips)
{
  Rng rng(7);
  std::uniform_real_distribution<double> len(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDPoint a = random_point(n, rng);
    const TangentVec x = random_tangent(a, rng, len(rng));
    const TangentVec back = log_map(a, exp_map(a, x));
    EXPECT_LE(max_abs(back.matrix() - x.matrix()), 1e-9 * std::max(1.0, max_abs(x.matrix())));

    const SPDPoint b = random_point(n, rng);
    const SPDPoint again = exp_map(a, log_map(a, b));
    EXPECT_LE(distance(again, b), 1e-9);
  }
}

TEST(Distance, Examples)
{
  Rng rng(8);
  const SPDPoint a = random_point(3, rng);
  EXPECT_NEAR(distance(a, a), 0.0, 1e-12);
  EXPECT_NEAR(distance(SPDPoint::identity(2), diag_point({std::exp(1.0), std::exp(-1.0)})),
              std::sqrt(2.0), 1e-12);
}

TEST(Distance, EqualsLogNorm)
{
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDPoint a = random_point(n, rng);
    const SPDPoint b = random_point(n, rng);
    const TangentVec l = log_map(a, b);
    EXPECT_NEAR(distance(a, b), std::sqrt(fiber_inner(l, l)), 1e-10);
  }
}

TEST(Distance, MetricAxioms)
{
  Rng rng(10);
  for (int trial = 0; trial < 1000; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDPoint a = random_point(n, rng);
    const SPDPoint b = random_point(n, rng);
    const SPDPoint c = random_point(n, rng);
    const double ab = distance(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, distance(b, a), 1e-10);
    EXPECT_LE(ab, distance(a, c) + distance(c, b) + 1e-10);
    EXPECT_LE(distance(a, a), 1e-10);
  }
}

TEST(GlAction, Examples)
{
  Rng rng(11);
  const SPDPoint a = random_point(3, rng);
  EXPECT_LE(max_abs(gl_action(Matrix::Identity(3, 3), a).matrix() - a.matrix()), 1e-12);
  const Matrix q = qcdist::testing::random_orthogonal(3, rng);
  EXPECT_LE(max_abs(gl_action(q, SPDPoint::identity(3)).matrix() - Matrix::Identity(3, 3)), 1e-12);
  EXPECT_THROW(gl_action(Matrix::Zero(3, 3), a), SingularError);
}

TEST(GlAction, IsAnIsometry)
{
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial)
  {
    const int n = 2 + trial % 3;
    const Matrix z = qcdist::testing::random_invertible(n, rng, 1e2);
    const SPDPoint a = random_point(n, rng);
    const SPDPoint b = random_point(n, rng);
    const SPDPoint za = gl_action(z, a);
    EXPECT_NEAR(za.matrix().determinant(), 1.0, 1e-10);
    EXPECT_NEAR(distance(za, gl_action(z, b)), distance(a, b), 1e-9);
  }
}

TEST(MebDetail, HessianMatchesFiniteDifferences)
{
  Rng rng(13);
  for (int n = 2; n <= 4; ++n)
  {
    const auto basis = detail::tracefree_basis(n);
    const auto m = static_cast<Eigen::Index>(basis.size());
    const SPDPoint p = random_point(n, rng, 1.2);
    SymEig e = sym_eig(p.matrix());
    e.values = e.values.array().log();
    const Matrix hess = detail::half_sq_distance_hessian(e, basis);

    auto f = [&](const Vector& v) {
      const Matrix c = spectral_apply(detail::from_coords(v, basis), [](double s) { return std::exp(s); });
      const double d = detail::affine_distance(c, p.matrix());
      return 0.5 * d * d;
    };
    const double h = 1e-4;
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b)
      {
        Vector ea = Vector::Zero(m);
        Vector eb = Vector::Zero(m);
        ea(a) = h;
        eb(b) = h;
        const double fd = (f(ea + eb) - f(ea - eb) - f(-ea + eb) + f(-ea - eb)) / (4 * h * h);
        EXPECT_NEAR(hess(a, b), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
  }
}

TEST(MebDetail, SimplexQpMatchesEnumeration)
{
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial)
  {
    const int k = 2 + trial % 4;
    const Matrix a = qcdist::testing::random_gaussian(k, k, rng);
    const Matrix q = a * a.transpose() + 0.1 * Matrix::Identity(k, k);
    const Vector f = qcdist::testing::random_gaussian(k, 1, rng);
    const Vector w = detail::solve_simplex_qp(q, f);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), 0.0);
    const double best = 0.5 * w.dot(q * w) - f.dot(w);
    // Dense grid over the simplex (k <= 3) or random simplex samples.
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int s = 0; s < 20000; ++s)
    {
      Vector u(k);
      for (int i = 0; i < k; ++i)
        u(i) = -std::log(ud(rng) + 1e-300);
      u /= u.sum();
      EXPECT_GE(0.5 * u.dot(q * u) - f.dot(u), best - 1e-12);
    }
  }
}

TEST(MinimalEnclosingBall, SinglePoint)
{
  Rng rng(15);
  const SPDPoint p = random_point(3, rng);
  const auto r = minimal_enclosing_ball({p});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.radius, 0.0, 1e-12);
  EXPECT_LE(distance(r.center, p), 1e-12);
}

TEST(MinimalEnclosingBall, TwoPointsGiveGeodesicMidpoint)
{
  Rng rng(16);
  for (int trial = 0; trial < 30; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDPoint a = random_point(n, rng);
    const SPDPoint b = random_point(n, rng);
    const auto r = minimal_enclosing_ball({a, b});
    EXPECT_TRUE(r.converged);
    const SPDPoint mid = exp_map(a, log_map(a, b).scaled(0.5));
    EXPECT_LE(distance(r.center, mid), 1e-9);
    EXPECT_NEAR(r.radius, 0.5 * distance(a, b), 1e-9);
    EXPECT_LE(std::abs(ball_residual(r.ball(), {a, b})), 1e-9);
    EXPECT_NEAR(distance(r.center, a), distance(r.center, b), 1e-9);
  }
}

TEST(MinimalEnclosingBall, SymmetricTriple)
{
  const double e = std::exp(1.0);
  const std::vector<SPDPoint> pts{SPDPoint::identity(2), diag_point({e, 1 / e}), diag_point({1 / e, e})};
  const auto r = minimal_enclosing_ball(pts);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(distance(r.center, SPDPoint::identity(2)), 1e-6);
  EXPECT_NEAR(r.radius, std::sqrt(2.0), 1e-6);

  // Dense grid of centers near I never beats the solver.
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j)
    {
      Matrix x(2, 2);
      x << 0.01 * i, 0.01 * j, 0.01 * j, -0.01 * i;
      const SPDPoint c = exp_map(SPDPoint::identity(2), TangentVec(SPDPoint::identity(2), SymMatrix(x)));
      double far = 0.0;
      for (const auto& p : pts)
        far = std::max(far, distance(c, p));
      EXPECT_GE(far, r.radius - 1e-9);
    }
}

TEST(MinimalEnclosingBall, InflatedRadiusResidual)
{
  Rng rng(17);
  const SPDPoint a = random_point(2, rng);
  const SPDPoint b = random_point(2, rng);
  const auto r = minimal_enclosing_ball({a, b});
  EXPECT_NEAR(ball_residual({r.center, r.radius + 1.0}, {a, b}), -1.0, 1e-12);
}

TEST(MinimalEnclosingBall, RandomCloudsAreOptimalAndUnique)
{
  Rng rng(18);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial)
  {
    const int n = 2 + trial % 3;
    const SPDPoint base = random_point(n, rng, 0.3);
    std::vector<SPDPoint> pts;
    for (int i = 0; i < 10; ++i)
      pts.push_back(exp_map(base, random_tangent(base, rng, 1.5 * std::abs(ud(rng)))));
    const auto r = minimal_enclosing_ball(pts);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(ball_residual(r.ball(), pts), 1e-7);

    // Perturbed centers never enclose with a smaller radius.
    for (int s = 0; s < 200; ++s)
    {
      const SPDPoint c = exp_map(r.center, random_tangent(r.center, rng, 0.1 * std::abs(ud(rng))));
      double far = 0.0;
      for (const auto& p : pts)
        far = std::max(far, distance(c, p));
      EXPECT_GE(far, r.radius - 1e-9);
    }

    // A different initialization (rotated point order) reaches the same center.
    std::vector<SPDPoint> rotated(pts.begin() + 3, pts.end());
    rotated.insert(rotated.end(), pts.begin(), pts.begin() + 3);
    const auto r2 = minimal_enclosing_ball(rotated);
    EXPECT_LE(distance(r.center, r2.center), 10 * SolverConfig{}.tol);
  }
}

TEST(MinimalEnclosingBall, EquivariantUnderGlAction)
{
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial)
  {
    const int n = 2 + trial % 3;
    std::vector<SPDPoint> pts;
    for (int i = 0; i < 6; ++i)
      pts.push_back(random_point(n, rng, 0.8));
    const Matrix z = qcdist::testing::random_invertible(n, rng, 10.0);
    std::vector<SPDPoint> moved;
    for (const auto& p : pts)
      moved.push_back(gl_action(z, p));
    const auto r = minimal_enclosing_ball(pts);
    const auto rz = minimal_enclosing_ball(moved);
    EXPECT_LE(distance(rz.center, gl_action(z, r.center)), 10 * SolverConfig{}.tol);
    EXPECT_NEAR(rz.radius, r.radius, 1e-9);
  }
}

TEST(MinimalEnclosingBall, DuplicatePointsAndIterationCap)
{
  Rng rng(20);
  const SPDPoint a = random_point(2, rng);
  const SPDPoint b = random_point(2, rng);
  const auto r = minimal_enclosing_ball({a, b, a, b, a});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.radius, 0.5 * distance(a, b), 1e-9);

  SolverConfig capped;
  capped.max_iterations = 3;
  const auto rc = minimal_enclosing_ball({a, b, random_point(2, rng)}, capped);
  EXPECT_FALSE(rc.converged);
  EXPECT_LE(rc.iterations, 3);

  EXPECT_THROW(minimal_enclosing_ball({}), DomainError);
}

TEST(MinimalEnclosingBall, RuntimeBudget)
{
  Rng rng(21);
  std::vector<SPDPoint> pts;
  for (int i = 0; i < 32; ++i)
    pts.push_back(random_point(4, rng, 1.0));
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = minimal_enclosing_ball(pts);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(r.converged);
  EXPECT_LT(ms, 50.0);
}
