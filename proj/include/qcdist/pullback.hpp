#pragma once

// Pullback metrics, the Riemannian Jacobian, the normalized pullback and the
// sampled distortion certificates for catalog maps.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcdist/chart_map.hpp"
#include "qcdist/metric_field.hpp"
#include "qcdist/scalar_field.hpp"
#include "qcdist/spd_manifold.hpp"
#include "qcdist/tensor_core.hpp"

namespace qcdist {

inline constexpr std::size_t kDefaultSamples = 4096;

/// D^T T D as a symmetric matrix.
inline SymMatrix pull_tensor(const Matrix& d, const Matrix& t)
{
  const Matrix r = d.transpose() * t * d;
  return SymMatrix(Matrix(0.5 * (r + r.transpose())));
}

/// Dphi(p)^T h(phi(p)) Dphi(p).
inline SymMatrix pullback_metric(const ChartMap& map, const MetricField& h, const Vector& p)
{
  check_same_dimension(map.dim(), h.dim());
  const Vector y = map.checked_apply(p);
  return pull_tensor(map.jacobian(p), h.at(y).matrix());
}

/// g(p)^{-1} Dphi(p)^T h(phi(p)).
inline Matrix adjoint_differential(const ChartMap& map, const MetricField& g, const MetricField& h,
                                   const Vector& p)
{
  check_same_dimension(map.dim(), g.dim());
  check_same_dimension(map.dim(), h.dim());
  const Vector y = map.checked_apply(p);
  const Matrix d = map.jacobian(p);
  return cholesky(g.at(p).matrix()).solve(Matrix(d.transpose() * h.at(y).matrix()));
}

struct DistortionReport
{
  Vector point;
  double k_squared = 0.0;
  std::vector<double> eigenvalues;
  int jac_sign = 1;
  /// Det(Dphi) = det(g^{-1} phi^* h)^{1/2}.
  double riem_jacobian = 0.0;
  bool singular = false;
  std::vector<std::pair<std::string, bool>> certificates;

  bool all_pass() const
  {
    for (const auto& c : certificates)
      if (!c.second)
        return false;
    return true;
  }
};

/// K^2(g, phi^* h) at p. When k2_bound is given, a "quasiregular" flag
/// records k_squared <= k2_bound.
inline DistortionReport map_distortion(const ChartMap& map, const MetricField& g, const MetricField& h,
                                       const Vector& p, std::optional<double> k2_bound = std::nullopt)
{
  check_same_dimension(map.dim(), g.dim());
  check_same_dimension(map.dim(), h.dim());
  const Vector y = map.checked_apply(p);
  const Matrix d = map.jacobian(p);
  const SPDMatrix gp = g.at(p);
  const SPDMatrix hy = h.at(y);
  const DistortionValue dv = distortion_value(gp, pull_tensor(d, hy.matrix()));

  DistortionReport r;
  r.point = p;
  r.eigenvalues = dv.eigenvalues;
  const double det = d.determinant();
  r.jac_sign = det > 0.0 ? 1 : (det < 0.0 ? -1 : map.orientation());
  r.singular = near_singular(d);
  r.k_squared = r.singular ? std::numeric_limits<double>::infinity() : dv.k_squared;
  r.riem_jacobian = std::sqrt(std::max(0.0, dv.det_part));

  const double direct =
      std::abs(det) * std::sqrt(hy.matrix().determinant() / gp.matrix().determinant());
  r.certificates.emplace_back("riem_jacobian",
                              std::abs(r.riem_jacobian - direct) <= 1e-9 * std::max(direct, tol::abs));
  if (!r.singular)
    r.certificates.emplace_back("ratio_bound", check_ratio_bound(dv));
  if (k2_bound)
    r.certificates.emplace_back("quasiregular", within_bound(r.k_squared, *k2_bound));
  return r;
}

/// phi^*_N A = phi^* A / Det_g(phi^* g)^{1/n} for a fiber tensor A at phi(p).
inline SPDMatrix normalized_pullback(const ChartMap& map, const MetricField& g, const Vector& p,
                                     const SPDMatrix& a)
{
  const int n = map.dim();
  check_same_dimension(n, g.dim());
  check_same_dimension(n, a.dim());
  const Vector y = map.checked_apply(p);
  const Matrix d = map.jacobian(p);
  if (near_singular(d))
    throw SingularError("normalized pullback through a singular Jacobian");
  const SPDMatrix gp = g.at(p);
  const double scale = invariant_det(gp, pull_tensor(d, g.at(y).matrix()));
  return SPDMatrix(Matrix(pull_tensor(d, a.matrix()).matrix() / std::pow(scale, 1.0 / n)));
}

/// Fiber tensor at p with unit invariant determinant represented by a.
inline SPDMatrix fiber_tensor(const MetricField& g, const Vector& p, const SPDPoint& a)
{
  const double s = std::pow(g.at(p).matrix().determinant(), 1.0 / g.dim());
  return SPDMatrix(Matrix(s * a.matrix()));
}

/// Normalized pullback on unit-determinant representatives.
inline SPDPoint normalized_pullback(const ChartMap& map, const MetricField& g, const Vector& p,
                                    const SPDPoint& a)
{
  const Vector y = map.checked_apply(p);
  return SPDPoint(normalized_pullback(map, g, p, fiber_tensor(g, y, a)));
}

/// Outcome of a sampled sweep of one inequality.
struct SweepCertificate
{
  std::string name;
  bool pass = true;
  /// Smallest (rhs - lhs) / |rhs| over evaluated samples.
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::size_t excluded = 0;

  void record(const InequalityCheck& c)
  {
    ++samples;
    if (!c.holds())
      pass = false;
    worst_margin = std::min(worst_margin, c.margin());
  }
};

namespace detail {

struct SampleEval
{
  Vector p;
  Vector y;
  Matrix d;
  DistortionValue k2;
};

/// Per-sample K^2(g, phi^* h); near-singular samples are dropped and counted.
inline std::vector<SampleEval> sweep_distortion(const ChartMap& map, const MetricField& g, const MetricField& h,
                                                const std::vector<Vector>& samples, std::size_t& excluded)
{
  std::vector<SampleEval> out;
  out.reserve(samples.size());
  for (const Vector& p : samples)
  {
    SampleEval e;
    e.p = p;
    e.y = map.checked_apply(p);
    e.d = map.jacobian(p);
    if (near_singular(e.d))
    {
      ++excluded;
      continue;
    }
    e.k2 = distortion_value(g.at(p), pull_tensor(e.d, h.at(e.y).matrix()));
    out.push_back(std::move(e));
  }
  return out;
}

inline double sup_k2(const std::vector<SampleEval>& evals)
{
  double s = 0.0;
  for (const auto& e : evals)
    s = std::max(s, e.k2.k_squared);
  return s;
}

inline SPDMatrix euclidean_pullback(const Matrix& d)
{
  return SPDMatrix(pull_tensor(d, Matrix::Identity(d.rows(), d.cols())));
}

}  // namespace detail

inline std::vector<Vector> default_samples(const ChartMap& map, std::size_t count = kDefaultSamples)
{
  return halton_points(map.source(), count);
}

/// Distortion of chart_h o phi o chart_g^{-1} between Euclidean metrics
/// against n^{2n} K1^2 K^2 K2^2, all constants sampled.
inline SweepCertificate check_localization_bound(const ChartMap& map, const MetricField& g, const MetricField& h,
                                                 const ChartMap& chart_g, const ChartMap& chart_h,
                                                 const std::vector<Vector>& samples)
{
  const int n = map.dim();
  SweepCertificate cert{"localization_bound"};
  const auto evals = detail::sweep_distortion(map, g, h, samples, cert.excluded);
  const double k2 = detail::sup_k2(evals);
  const ChartMap rep = ChartMap::composition(ChartMap::composition(chart_g.inverse(), map), chart_h);

  double k1 = 0.0;
  double k2h = 0.0;
  std::vector<std::pair<Vector, double>> local;
  for (const auto& e : evals)
  {
    const Vector x = chart_g.checked_apply(e.p);
    const Matrix dr = rep.jacobian(x);
    const Matrix dg = chart_g.jacobian(e.p);
    const Matrix dh = chart_h.jacobian(e.y);
    if (near_singular(dr) || near_singular(dg) || near_singular(dh))
    {
      ++cert.excluded;
      continue;
    }
    k1 = std::max(k1, distortion_k2(detail::euclidean_pullback(dg), g.at(e.p)).k_squared);
    k2h = std::max(k2h, distortion_k2(h.at(e.y), detail::euclidean_pullback(dh)).k_squared);
    local.emplace_back(x, distortion_value(SPDMatrix::identity(n), pull_tensor(dr, Matrix::Identity(n, n))).k_squared);
  }
  const double rhs = std::pow(double(n), 2 * n) * k1 * k2 * k2h;
  for (const auto& l : local)
    cert.record({l.second, rhs});
  return cert;
}

/// K^2(g, (psi o phi)^* k) <= n^n K^2 K'^2 with K^2 = sup K^2(g, phi^* h) and
/// K'^2 = sup K^2(h, psi^* k) over the images of the samples.
inline SweepCertificate check_composition_bound(const ChartMap& phi, const ChartMap& psi, const MetricField& g,
                                                const MetricField& h, const MetricField& k,
                                                const std::vector<Vector>& samples)
{
  const int n = phi.dim();
  SweepCertificate cert{"composition_bound"};
  const auto first = detail::sweep_distortion(phi, g, h, samples, cert.excluded);
  std::vector<Vector> images;
  for (const auto& e : first)
    images.push_back(e.y);
  std::size_t dropped = 0;
  const auto second = detail::sweep_distortion(psi, h, k, images, dropped);
  const double rhs = std::pow(double(n), n) * detail::sup_k2(first) * detail::sup_k2(second);
  const ChartMap both = ChartMap::composition(phi, psi);
  for (const auto& e : first)
  {
    const Matrix d = both.jacobian(e.p);
    if (near_singular(d))
    {
      ++cert.excluded;
      continue;
    }
    const Vector z = both.checked_apply(e.p);
    cert.record({distortion_value(g.at(e.p), pull_tensor(d, k.at(z).matrix())).k_squared, rhs});
  }
  return cert;
}

/// K^2(h, (phi^{-1})^* g)(phi(p)) <= (sup K^2(g, phi^* h))^{n-1}.
inline SweepCertificate check_inverse_bound_map(const ChartMap& map, const MetricField& g, const MetricField& h,
                                                const std::vector<Vector>& samples)
{
  const int n = map.dim();
  const ChartMap inv = map.inverse();
  SweepCertificate cert{"inverse_bound"};
  const auto evals = detail::sweep_distortion(map, g, h, samples, cert.excluded);
  const double rhs = std::pow(detail::sup_k2(evals), n - 1);
  for (const auto& e : evals)
  {
    const Matrix d = inv.jacobian(e.y);
    if (near_singular(d))
    {
      ++cert.excluded;
      continue;
    }
    const Vector x = inv.checked_apply(e.y);
    cert.record({distortion_value(h.at(e.y), pull_tensor(d, g.at(x).matrix())).k_squared, rhs});
  }
  return cert;
}

/// |d(u o phi)|_g^n <= n^n K Det(Dphi) |du|_h^n(phi(p)) with K the sampled sup.
inline SweepCertificate check_gradient_bound(const ChartMap& map, const MetricField& g, const MetricField& h,
                                             const ScalarField& u, const std::vector<Vector>& samples)
{
  const int n = map.dim();
  check_same_dimension(n, u.dim());
  SweepCertificate cert{"gradient_bound"};
  const auto evals = detail::sweep_distortion(map, g, h, samples, cert.excluded);
  const double k = std::sqrt(detail::sup_k2(evals));
  const double nn = std::pow(double(n), n);
  for (const auto& e : evals)
  {
    const Vector du = u.gradient(e.y);
    const Vector pulled = e.d.transpose() * du;
    const double lhs_norm = std::sqrt(std::max(0.0, pulled.dot(cholesky(g.at(e.p).matrix()).solve(pulled))));
    const double rhs_norm = std::sqrt(std::max(0.0, du.dot(cholesky(h.at(e.y).matrix()).solve(du))));
    const double det = std::sqrt(std::max(0.0, e.k2.det_part));
    cert.record({std::pow(lhs_norm, n), nn * k * det * std::pow(rhs_norm, n)});
  }
  return cert;
}

/// Integration region: an axis-aligned box or a Euclidean ball.
struct Region
{
  enum class Kind
  {
    box,
    ball
  };
  Kind kind = Kind::box;
  Box box;
  Vector center;
  double radius = 0.0;

  static Region of_box(Box b) { return {Kind::box, std::move(b), {}, 0.0}; }
  static Region of_ball(Vector c, double r)
  {
    if (!(r > 0.0))
      throw DomainError("ball radius must be positive");
    return {Kind::ball, {}, std::move(c), r};
  }

  int dim() const { return kind == Kind::box ? box.dim() : static_cast<int>(center.size()); }

  bool contains(const Vector& x, double slack) const
  {
    if (kind == Kind::box)
      return box.contains(x, slack);
    return (x - center).norm() <= radius * (1.0 + slack) + slack;
  }
};

/// Midpoint-rule nodes and weights with m cells per axis. Balls use polar
/// (n = 2) or spherical (n = 3) coordinates.
inline std::vector<std::pair<Vector, double>> quadrature_nodes(const Region& region, int m)
{
  if (m <= 0)
    throw DomainError("quadrature resolution must be positive");
  const int n = region.dim();
  std::vector<std::pair<Vector, double>> out;
  if (region.kind == Region::Kind::box)
  {
    double w = 1.0;
    for (int i = 0; i < n; ++i)
      w *= (region.box.upper(i) - region.box.lower(i)) / m;
    for (auto& x : grid_nodes(region.box, std::vector<int>(static_cast<std::size_t>(n), m)))
      out.emplace_back(std::move(x), w);
    return out;
  }
  const double pi = std::acos(-1.0);
  const double dr = region.radius / m;
  if (n == 2)
  {
    const double dt = 2.0 * pi / m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
      {
        const double r = (i + 0.5) * dr;
        const double t = (j + 0.5) * dt;
        Vector x = region.center;
        x(0) += r * std::cos(t);
        x(1) += r * std::sin(t);
        out.emplace_back(std::move(x), r * dr * dt);
      }
    return out;
  }
  if (n == 3)
  {
    const double dth = pi / m;
    const double dph = 2.0 * pi / m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
        {
          const double r = (i + 0.5) * dr;
          const double th = (j + 0.5) * dth;
          const double ph = (k + 0.5) * dph;
          Vector x = region.center;
          x(0) += r * std::sin(th) * std::cos(ph);
          x(1) += r * std::sin(th) * std::sin(ph);
          x(2) += r * std::cos(th);
          out.emplace_back(std::move(x), r * r * std::sin(th) * dr * dth * dph);
        }
    return out;
  }
  throw DimensionError("ball quadrature supports n = 2 and n = 3 only");
}

/// Image of a region under a catalog map when it is again a box or a ball.
inline std::optional<Region> image_region(const ChartMap& map, const Region& region)
{
  const int n = map.dim();
  const Vector zero = Vector::Zero(n);
  switch (map.kind())
  {
    case MapKind::identity:
      return region;
    case MapKind::translation:
    case MapKind::linear:
    case MapKind::declared_inverse:
    {
      const bool ball = region.kind == Region::Kind::ball;
      const Vector x0 = ball ? region.center : region.box.lower;
      const Matrix a = map.jacobian(x0);
      if (!(map.jacobian(map.source().sampling_box().upper) - a).isZero(0.0))
        return std::nullopt;
      const Vector b = map(x0) - a * x0;
      if (ball)
      {
        const double s = std::pow(std::abs(a.determinant()), 1.0 / n);
        if (!(a.transpose() * a).isApprox(s * s * Matrix::Identity(n, n), 1e-14))
          return std::nullopt;
        return Region::of_ball(a * region.center + b, s * region.radius);
      }
      Box t{b, b};
      for (int i = 0; i < n; ++i)
      {
        int nz = 0;
        for (int k = 0; k < n; ++k)
        {
          if (a(i, k) == 0.0)
            continue;
          ++nz;
          const double u = a(i, k) * region.box.lower(k);
          const double v = a(i, k) * region.box.upper(k);
          t.lower(i) += std::min(u, v);
          t.upper(i) += std::max(u, v);
        }
        if (nz != 1)
          return std::nullopt;
      }
      return Region::of_box(t);
    }
    case MapKind::mobius_ball:
    case MapKind::radial_stretch:
    {
      if (region.kind != Region::Kind::ball || !region.center.isZero(0.0))
        return std::nullopt;
      // Both maps send spheres about the origin to spheres symmetric about
      // the axis through the origin and the parameter; the axis points
      // bound the image diameter.
      Vector axis = zero;
      axis(0) = 1.0;
      Vector y1 = map(region.radius * axis);
      Vector y2 = map(-region.radius * axis);
      if (map.kind() == MapKind::mobius_ball)
      {
        const Vector a = map(zero);
        if (a.norm() > 0.0)
        {
          const Vector dir = a.normalized();
          y1 = map(region.radius * dir);
          y2 = map(-region.radius * dir);
        }
      }
      return Region::of_ball(0.5 * (y1 + y2), 0.5 * (y1 - y2).norm());
    }
    case MapKind::composition:
    {
      const auto mid = image_region(*map.parts()[0], region);
      if (!mid)
        return std::nullopt;
      return image_region(*map.parts()[1], *mid);
    }
  }
  return std::nullopt;
}

struct SubstitutionResult
{
  double lhs = 0.0;
  double rhs = 0.0;
  double relerr = 0.0;
  int resolution = 0;
};

/// Compares the integral of (f o phi) Det(Dphi) dmu_g over the source region
/// with the integral of f dmu_h over its image, both by the midpoint rule.
inline SubstitutionResult substitution_check(const ChartMap& map, const MetricField& g, const MetricField& h,
                                             const ScalarField& f, const Region& source, const Region& target,
                                             int resolution)
{
  const int n = map.dim();
  check_same_dimension(n, source.dim());
  check_same_dimension(n, target.dim());
  check_same_dimension(n, f.dim());
  if (!map.has_inverse())
    throw CatalogError("substitution needs a map with a declared inverse");
  const ChartMap inv = map.inverse();
  constexpr double slack = 1e-9;

  SubstitutionResult r;
  r.resolution = resolution;
  for (const auto& [x, w] : quadrature_nodes(source, resolution))
  {
    const Vector y = map.checked_apply(x);
    if (!target.contains(y, slack))
      throw DomainError("map is not a bijection between the declared regions");
    const Matrix d = map.jacobian(x);
    const SPDMatrix gx = g.at(x);
    const double det = std::sqrt(std::max(0.0, invariant_det(gx, pull_tensor(d, h.at(y).matrix()))));
    r.lhs += f(y) * det * std::sqrt(gx.matrix().determinant()) * w;
  }
  for (const auto& [y, w] : quadrature_nodes(target, resolution))
  {
    if (!source.contains(inv.checked_apply(y), slack))
      throw DomainError("map is not a bijection between the declared regions");
    r.rhs += f(y) * std::sqrt(h.at(y).matrix().determinant()) * w;
  }
  r.relerr = std::abs(r.lhs - r.rhs) / std::max(std::abs(r.rhs), std::numeric_limits<double>::min());
  return r;
}

struct ConvergenceReport
{
  /// Sampled sup |phi_j(p) - phi(p)| per term.
  std::vector<double> sup_distance;
  /// Sampled sup K^2(g, phi_j^* h) per term.
  std::vector<double> term_k2;
  double limit_k2 = 0.0;
  /// Right-hand side of the certificate: the supplied bound or the largest term value.
  double bound = 0.0;
  std::size_t samples = 0;
  bool certificate = false;
};

/// Sampled distortion along a map sequence and of its limit. The certificate
/// checks limit K^2 <= bound, where bound is k2_bound when given (the
/// sequence's uniform constant) and otherwise the largest sampled term value.
inline ConvergenceReport uniform_convergence_demo(const std::vector<ChartMap>& sequence, const ChartMap& limit,
                                                  const MetricField& g, const MetricField& h,
                                                  const std::vector<Vector>& samples,
                                                  std::optional<double> k2_bound = std::nullopt)
{
  if (sequence.empty())
    throw DomainError("map sequence is empty");
  ConvergenceReport r;
  r.samples = samples.size();
  std::size_t excluded = 0;
  double term_max = 0.0;
  for (const ChartMap& m : sequence)
  {
    double dist = 0.0;
    for (const Vector& p : samples)
      dist = std::max(dist, (m(p) - limit(p)).norm());
    r.sup_distance.push_back(dist);
    r.term_k2.push_back(detail::sup_k2(detail::sweep_distortion(m, g, h, samples, excluded)));
    term_max = std::max(term_max, r.term_k2.back());
  }
  r.limit_k2 = detail::sup_k2(detail::sweep_distortion(limit, g, h, samples, excluded));
  r.bound = k2_bound ? *k2_bound : term_max;
  r.certificate = within_bound(r.limit_k2, r.bound);
  return r;
}

}  // namespace qcdist
