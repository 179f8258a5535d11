#include <gtest/gtest.h>

#include <cmath>

#include "qcdist/group_solver.hpp"
#include "test_support.hpp"

using namespace qcdist;

namespace {

Matrix mat2(double a, double b, double c, double d)
{
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

std::vector<Vector> square_grid(int m) { return grid_nodes(Box::cube(2, -1.0, 1.0), {m, m}); }

/// {id, A} with A = [[0, 2], [1/2, 0]], A^2 = I.
QCGroup order_two_group()
{
  const Matrix a = mat2(0.0, 2.0, 0.5, 0.0);
  const double k = std::sqrt(distortion_k2(SPDMatrix::identity(2), SPDMatrix(Matrix(a.transpose() * a))).k_squared);
  return QCGroup({ChartMap::identity(2), ChartMap::linear(a)}, k);
}

/// Powers of P R P^{-1} with R the quarter turn.
QCGroup order_four_group()
{
  const Matrix p = mat2(1.0, 0.5, 0.0, 1.0);
  const Matrix r = mat2(0.0, -1.0, 1.0, 0.0);
  const Matrix phi = p * r * p.inverse();
  std::vector<ChartMap> elems;
  Matrix power = Matrix::Identity(2, 2);
  double k2 = 1.0;
  for (int i = 0; i < 4; ++i)
  {
    elems.push_back(ChartMap::linear(power));
    k2 = std::max(k2, distortion_k2(SPDMatrix::identity(2), SPDMatrix(Matrix(power.transpose() * power))).k_squared);
    power = phi * power;
  }
  return QCGroup(elems, std::sqrt(k2) * (1.0 + 1e-12), {ChartMap::linear(phi)});
}

QCGroup rotation_group()
{
  const Matrix r = mat2(0.0, -1.0, 1.0, 0.0);
  std::vector<ChartMap> elems;
  Matrix power = Matrix::Identity(2, 2);
  for (int i = 0; i < 4; ++i)
  {
    elems.push_back(ChartMap::linear(power));
    power = r * power;
  }
  return QCGroup(elems, 1.0);
}

}  // namespace

TEST(QCGroup, VerifiesClosureAndBound)
{
  const auto e = MetricField::euclidean(2);
  const auto grid = square_grid(4);
  EXPECT_NO_THROW(order_two_group().verify(e, grid));
  EXPECT_NO_THROW(order_four_group().verify(e, grid));
  const QCGroup open({ChartMap::identity(2), ChartMap::linear(mat2(2.0, 0.0, 0.0, 1.0))}, 2.0);
  EXPECT_THROW(open.verify(e, grid), CatalogError);
  const QCGroup no_id({ChartMap::linear(mat2(-1.0, 0.0, 0.0, 1.0))}, 1.0);
  EXPECT_THROW(no_id.verify(e, grid), CatalogError);
  const QCGroup tight({ChartMap::identity(2), ChartMap::linear(mat2(0.0, 2.0, 0.5, 0.0))}, 1.0);
  EXPECT_THROW(tight.verify(e, grid), CatalogError);
  EXPECT_THROW(QCGroup({}, 1.0), CatalogError);
  EXPECT_THROW(QCGroup({ChartMap::identity(2)}, 0.5), CatalogError);
}

TEST(BuildOrbit, TrivialGroup)
{
  const auto g = MetricField::conformal_flat(0.3, Vector::Constant(2, 0.2));
  const QCGroup trivial({ChartMap::identity(2)}, 1.0);
  const Vector p = Vector::Constant(2, 0.25);
  const OrbitSet o = build_orbit(trivial, g, p);
  ASSERT_EQ(o.members.size(), 1u);
  EXPECT_TRUE(o.members[0].same_as(SPDPoint(g.at(p).matrix())));
  EXPECT_EQ(o.diameter, 0.0);
}

TEST(BuildOrbit, OrderFourDiameter)
{
  const auto e = MetricField::euclidean(2);
  const QCGroup grp = order_four_group();
  const OrbitSet o = build_orbit(grp, e, Vector::Constant(2, 0.1));
  ASSERT_EQ(o.members.size(), 4u);
  double diam = 0.0;
  for (const auto& a : o.members)
    for (const auto& b : o.members)
      diam = std::max(diam, distance(a, b));
  EXPECT_DOUBLE_EQ(o.diameter, diam);
  const double k2 = grp.k_bound() * grp.k_bound();
  EXPECT_LE(diam, 2.0 * std::sqrt(2.0) * std::log(4.0 * k2));
  EXPECT_GT(diam, 0.1);
}

TEST(BuildOrbit, IsometryGroupIsSinglePoint)
{
  const auto g = MetricField::round_sphere_stereographic(2);
  const OrbitSet o = build_orbit(rotation_group(), g, Vector::Constant(2, 0.4));
  for (const auto& m : o.members)
    EXPECT_LT(distance(m, o.members[0]), 1e-14);
}

TEST(OrbitInvariance, CatalogGroups)
{
  const auto e = MetricField::euclidean(2);
  const auto g = MetricField::conformal_flat(0.1, Vector::Constant(2, -0.3));
  const QCGroup trivial({ChartMap::identity(2)}, 1.0);
  EXPECT_TRUE(check_orbit_invariance(trivial, g, Vector::Constant(2, 0.2)));
  for (const Vector& p : halton_points(Box::cube(2, -1.0, 1.0), 100))
  {
    EXPECT_TRUE(check_orbit_invariance(order_four_group(), e, p));
    EXPECT_TRUE(check_orbit_invariance(order_two_group(), g, p));
    EXPECT_TRUE(check_orbit_invariance(rotation_group(), g, p));
  }
}

TEST(SolveInvariantStructure, TrivialGroup)
{
  const auto g = MetricField::round_sphere_stereographic(2, 0.7);
  const QCGroup trivial({ChartMap::identity(2)}, 1.0);
  const auto grid = square_grid(3);
  const auto s = solve_invariant_structure(trivial, g, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    EXPECT_TRUE(s.h_field[i].same_as(SPDPoint(g.at(grid[i]).matrix())));
    EXPECT_EQ(s.residuals[i][0], 0.0);
  }
  for (const auto& row : beltrami_residual(s, trivial, g))
    EXPECT_LT(row[0], 1e-15);
}

TEST(SolveInvariantStructure, ConformalGenerator)
{
  const auto g = MetricField::conformal_flat(0.2, Vector::Constant(2, 0.3));
  const QCGroup grp = rotation_group();
  const auto grid = square_grid(4);
  grp.verify(g, grid);
  const auto s = solve_invariant_structure(grp, g, grid);
  EXPECT_TRUE(s.certified());
  EXPECT_LE(s.max_residual(), 1e-9);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LT(distance(s.h_field[i], SPDPoint(g.at(grid[i]).matrix())), 1e-12);
  for (const auto& row : beltrami_residual(s, grp, g))
    for (double r : row)
      EXPECT_LE(r, 1e-9);
}

TEST(SolveInvariantStructure, OrderTwoMidpoint)
{
  const auto e = MetricField::euclidean(2);
  const QCGroup grp = order_two_group();
  const auto grid = square_grid(4);
  const auto s = solve_invariant_structure(grp, e, grid);
  EXPECT_TRUE(s.certified());
  const SPDPoint a(Matrix::Identity(2, 2));
  const SPDPoint b(mat2(0.25, 0.0, 0.0, 4.0));
  const SPDPoint mid = geodesic_point(a, b, 0.5);
  EXPECT_LT((mid.matrix() - mat2(0.5, 0.0, 0.0, 2.0)).norm(), 1e-15);
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    EXPECT_LT(distance(s.h_field[i], mid), 1e-9);
    EXPECT_NEAR(s.conformal_factors[i][1], 1.0, 1e-12);
    // Direct check A^T h A == c h.
    const Matrix& h = s.h_field[i].matrix();
    const Matrix a2 = mat2(0.0, 2.0, 0.5, 0.0);
    EXPECT_LT((a2.transpose() * h * a2 - h).norm() / h.norm(), 1e-8);
  }
  for (const auto& row : beltrami_residual(s, grp, e))
    for (double r : row)
      EXPECT_LE(r, 1e-8);
}

TEST(SolveInvariantStructure, OrderFourEquivarianceAndUnitDeterminant)
{
  const auto g = MetricField::conformal_flat(0.0, Vector::Constant(2, 0.1));
  const QCGroup grp = order_four_group();
  const auto grid = square_grid(5);
  const auto s = solve_invariant_structure(grp, g, grid);
  EXPECT_EQ(s.skipped_count(), 0u);
  EXPECT_LE(s.max_residual(), 10.0 * s.tol);
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    EXPECT_TRUE(s.converged[i]);
    EXPECT_NEAR(invariant_det(g.at(grid[i]), fiber_tensor(g, grid[i], s.h_field[i])), 1.0, 1e-10);
    EXPECT_LE(s.diameter[i], grp.diameter_bound() * (1.0 + 1e-9));
    for (std::size_t e = 0; e < grp.order(); ++e)
    {
      const double direct =
          std::pow(invariant_det(g.at(grid[i]), pullback_metric(grp.elements()[e], g, grid[i])), 0.5);
      EXPECT_NEAR(s.conformal_factors[i][e], direct, 1e-9 * direct);
    }
  }
  for (const auto& row : beltrami_residual(s, grp, g))
    for (double r : row)
      EXPECT_LE(r, 1e-8);
}
