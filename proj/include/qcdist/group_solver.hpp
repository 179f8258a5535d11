#pragma once

// Invariant conformal structure of a finite quasiconformal group: orbit sets
// of normalized pullbacks in each fiber, their minimal enclosing balls, and
// the residuals of the resulting structure.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qcdist/meb.hpp"
#include "qcdist/pullback.hpp"

namespace qcdist {

/// Finite group given by its full element list; closure is verified on a grid.
class QCGroup
{
public:
  QCGroup(std::vector<ChartMap> elements, double k_bound, std::vector<ChartMap> generators = {})
      : elements_(std::move(elements)), generators_(std::move(generators)), k_bound_(k_bound)
  {
    if (elements_.empty())
      throw CatalogError("group needs at least one element");
    if (!(k_bound_ >= 1.0))
      throw CatalogError("group K bound must be at least 1");
    for (const auto& e : elements_)
    {
      check_same_dimension(elements_.front().dim(), e.dim());
      if (!e.has_inverse())
        throw CatalogError("group element without a declared inverse");
    }
  }

  int dim() const { return elements_.front().dim(); }
  std::size_t order() const { return elements_.size(); }
  const std::vector<ChartMap>& elements() const { return elements_; }
  const std::vector<ChartMap>& generators() const { return generators_; }
  double k_bound() const { return k_bound_; }

  /// Throws CatalogError unless the element list contains the identity, is
  /// closed under composition, contains the generators and every element
  /// satisfies K^2(g, phi^* g) <= k_bound^2 on the grid.
  void verify(const MetricField& g, const std::vector<Vector>& grid, double tol = 1e-9) const
  {
    auto agrees = [&](const ChartMap& a, auto&& value) {
      for (const Vector& x : grid)
      {
        std::optional<Vector> v;
        try
        {
          v = value(x);
        }
        catch (const DomainError&)
        {
          continue;
        }
        const Vector y = a(x);
        if ((y - *v).norm() > tol * std::max(1.0, v->norm()))
          return false;
      }
      return true;
    };
    auto listed = [&](auto&& value) {
      for (const auto& e : elements_)
        if (agrees(e, value))
          return true;
      return false;
    };
    if (!listed([](const Vector& x) { return x; }))
      throw CatalogError("group element list lacks the identity");
    for (const auto& gen : generators_)
      if (!listed([&](const Vector& x) { return gen(x); }))
        throw CatalogError("generator missing from the group element list");
    for (const auto& a : elements_)
      for (const auto& b : elements_)
        if (!listed([&](const Vector& x) { return a(b.checked_apply(x)); }))
          throw CatalogError("group element list is not closed under composition");
    const double bound = k_bound_ * k_bound_;
    for (const auto& e : elements_)
      for (const Vector& x : grid)
      {
        const auto r = map_distortion(e, g, g, x);
        if (!r.singular && !within_bound(r.k_squared, bound))
          throw CatalogError("group element exceeds the K bound: K^2 = " + std::to_string(r.k_squared));
      }
  }

  /// 2 sqrt(n) log(n^n K^2).
  double diameter_bound() const
  {
    const double n = dim();
    return 2.0 * std::sqrt(n) * std::log(std::pow(n, n) * k_bound_ * k_bound_);
  }

private:
  std::vector<ChartMap> elements_;
  std::vector<ChartMap> generators_;
  double k_bound_;
};

struct OrbitSet
{
  Vector point;
  /// psi^*_N g(p) per element, as unit-determinant representatives.
  std::vector<SPDPoint> members;
  bool skipped = false;
  double diameter = 0.0;
};

/// E(p) = {psi^*_N g(p) : psi in G}. Throws NumericalError when the orbit
/// exceeds the diameter bound.
inline OrbitSet build_orbit(const QCGroup& group, const MetricField& g, const Vector& p)
{
  OrbitSet o;
  o.point = p;
  for (const auto& e : group.elements())
    if (near_singular(e.jacobian(p)))
    {
      o.skipped = true;
      return o;
    }
  for (const auto& e : group.elements())
    o.members.push_back(SPDPoint(pullback_metric(e, g, p).matrix()));
  for (std::size_t i = 0; i < o.members.size(); ++i)
    for (std::size_t j = i + 1; j < o.members.size(); ++j)
      o.diameter = std::max(o.diameter, distance(o.members[i], o.members[j]));
  if (!within_bound(o.diameter, group.diameter_bound()))
    throw NumericalError("orbit diameter " + std::to_string(o.diameter) + " exceeds the bound " +
                         std::to_string(group.diameter_bound()));
  return o;
}

/// For each element phi, {phi^*_N a : a in E(phi(p))} equals E(p) as a set,
/// matched by nearest neighbours within match_tol in both directions.
inline bool check_orbit_invariance(const QCGroup& group, const MetricField& g, const Vector& p,
                                   double match_tol = 1e-8)
{
  const OrbitSet here = build_orbit(group, g, p);
  if (here.skipped)
    return true;
  auto covered = [match_tol](const std::vector<SPDPoint>& from, const std::vector<SPDPoint>& into) {
    for (const auto& a : from)
    {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& b : into)
        best = std::min(best, distance(a, b));
      if (!(best <= match_tol))
        return false;
    }
    return true;
  };
  for (const auto& phi : group.elements())
  {
    const Vector y = phi.checked_apply(p);
    const OrbitSet there = build_orbit(group, g, y);
    if (there.skipped)
      continue;
    std::vector<SPDPoint> moved;
    for (const auto& a : there.members)
      moved.push_back(normalized_pullback(phi, g, p, a));
    if (!covered(moved, here.members) || !covered(here.members, moved))
      return false;
  }
  return true;
}

struct InvariantStructure
{
  std::vector<Vector> grid;
  /// Center of the minimal enclosing ball of E(p), a unit-determinant representative.
  std::vector<SPDPoint> h_field;
  std::vector<bool> skipped;
  std::vector<bool> converged;
  std::vector<double> radius;
  std::vector<double> diameter;
  /// residuals[node][element] = d(phi^*_N h(phi(p)), h(p)).
  std::vector<std::vector<double>> residuals;
  /// conformal_factors[node][element] = Det_g(phi^* g)(p)^{1/n}.
  std::vector<std::vector<double>> conformal_factors;
  /// h(phi(p)) per node and element.
  std::vector<std::vector<SPDPoint>> image_h;
  double tol = 0.0;

  double max_residual() const
  {
    double m = 0.0;
    for (std::size_t i = 0; i < residuals.size(); ++i)
      if (!skipped[i])
        for (double r : residuals[i])
          m = std::max(m, r);
    return m;
  }

  /// Residual budget 10 * tol.
  bool certified() const { return max_residual() <= 10.0 * tol; }

  std::size_t skipped_count() const
  {
    std::size_t c = 0;
    for (bool s : skipped)
      c += s ? 1 : 0;
    return c;
  }
};

/// h(p) = center of the minimal enclosing ball of E(p) at every grid node.
inline InvariantStructure solve_invariant_structure(const QCGroup& group, const MetricField& g,
                                                    const std::vector<Vector>& grid,
                                                    const SolverConfig& cfg = {})
{
  const int n = group.dim();
  InvariantStructure s;
  s.grid = grid;
  s.tol = cfg.tol;
  const std::size_t count = grid.size();
  s.h_field.assign(count, SPDPoint::identity(n));
  s.skipped.assign(count, false);
  s.converged.assign(count, false);
  s.radius.assign(count, 0.0);
  s.diameter.assign(count, 0.0);
  s.residuals.assign(count, {});
  s.conformal_factors.assign(count, {});
  s.image_h.assign(count, {});

  auto center_at = [&](const Vector& x, bool& ok) -> std::optional<BallResult> {
    const OrbitSet o = build_orbit(group, g, x);
    if (o.skipped)
      return std::nullopt;
    BallResult b = minimal_enclosing_ball(o.members, cfg);
    ok = ok && b.converged;
    return b;
  };

  for (std::size_t i = 0; i < count; ++i)
  {
    const Vector& p = grid[i];
    const OrbitSet o = build_orbit(group, g, p);
    if (o.skipped)
    {
      s.skipped[i] = true;
      continue;
    }
    s.diameter[i] = o.diameter;
    const BallResult b = minimal_enclosing_ball(o.members, cfg);
    s.h_field[i] = b.center;
    s.radius[i] = b.radius;
    bool ok = b.converged;

    const SPDMatrix gp = g.at(p);
    for (const auto& phi : group.elements())
    {
      const Vector y = phi.checked_apply(p);
      SPDPoint hy = b.center;
      if (y != p)
      {
        const auto end = grid.begin() + static_cast<std::ptrdiff_t>(i);
        const auto hit = std::find(grid.begin(), end, y);
        const auto k = static_cast<std::size_t>(hit - grid.begin());
        std::optional<BallResult> there;
        if (hit == end)
          there = center_at(y, ok);
        else if (!s.skipped[k])
          there = BallResult{s.h_field[k]};
        if (!there)
        {
          s.skipped[i] = true;
          break;
        }
        hy = there->center;
      }
      s.image_h[i].push_back(hy);
      s.residuals[i].push_back(distance(normalized_pullback(phi, g, p, hy), b.center));
      s.conformal_factors[i].push_back(
          std::pow(invariant_det(gp, pullback_metric(phi, g, p)), 1.0 / n));
    }
    s.converged[i] = ok;
  }
  return s;
}

/// ||phi^* h(p) - c h(p)||_F / ||h(p)||_F per node and element, with h taken
/// as the unit-invariant-determinant fiber tensor and c = Det_g(phi^* g)^{1/n}.
inline std::vector<std::vector<double>> beltrami_residual(const InvariantStructure& s, const QCGroup& group,
                                                          const MetricField& g)
{
  std::vector<std::vector<double>> out(s.grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i)
  {
    if (s.skipped[i])
      continue;
    const Vector& p = s.grid[i];
    const Matrix hp = fiber_tensor(g, p, s.h_field[i]).matrix();
    for (std::size_t e = 0; e < group.order(); ++e)
    {
      const ChartMap& phi = group.elements()[e];
      const Vector y = phi.checked_apply(p);
      const Matrix hy = fiber_tensor(g, y, s.image_h[i][e]).matrix();
      const Matrix pulled = pull_tensor(phi.jacobian(p), hy).matrix();
      const double c = s.conformal_factors[i][e];
      out[i].push_back((pulled - c * hp).norm() / hp.norm());
    }
  }
  return out;
}

}  // namespace qcdist
