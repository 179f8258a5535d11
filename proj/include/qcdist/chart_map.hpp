#pragma once

// Closed catalog of differentiable maps between chart domains, with analytic
// Jacobians checked against central differences when a map is built.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcdist/domain.hpp"
#include "qcdist/linalg.hpp"

namespace qcdist {

enum class MapKind
{
  identity,
  linear,
  translation,
  mobius_ball,
  radial_stretch,
  composition,
  declared_inverse,
};

inline const char* to_string(MapKind k)
{
  switch (k)
  {
    case MapKind::identity: return "identity";
    case MapKind::linear: return "linear";
    case MapKind::translation: return "translation";
    case MapKind::mobius_ball: return "mobius_ball";
    case MapKind::radial_stretch: return "radial_stretch";
    case MapKind::composition: return "composition";
    case MapKind::declared_inverse: return "declared_inverse";
  }
  return "?";
}

/// |det J| below this multiple of ||J||_F^n counts as singular.
inline constexpr double kSingularRatio = 1e-12;

inline bool near_singular(const Matrix& j)
{
  const double det = j.determinant();
  return !(std::abs(det) >= kSingularRatio * std::pow(j.norm(), static_cast<double>(j.rows())));
}

class ChartMap
{
public:
  using Apply = std::function<Vector(const Vector&)>;
  using Jacobian = std::function<Matrix(const Vector&)>;

  static ChartMap identity(int n) { return identity(n, Box::whole(n)); }
  static ChartMap identity(int n, const Box& box)
  {
    check_dimension(n);
    ChartMap m(MapKind::identity, box, box, [](const Vector& x) { return x; },
               [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); });
    m.inverse_ = [n, box] { return identity(n, box); };
    return m.validated();
  }

  /// x -> A x. The target box defaults to the bounding box of the image.
  static ChartMap linear(const Matrix& a) { return linear(a, Box::whole(static_cast<int>(a.rows()))); }
  static ChartMap linear(const Matrix& a, const Box& source)
  {
    return linear(a, source, image_bounds(a, Vector::Zero(a.rows()), source));
  }
  static ChartMap linear(const Matrix& a, const Box& source, const Box& target)
  {
    if (a.rows() != a.cols())
      throw DimensionError("linear map needs a square matrix");
    check_dimension(a.rows());
    check_same_dimension(a.rows(), source.dim());
    check_same_dimension(a.rows(), target.dim());
    ChartMap m(MapKind::linear, source, target, [a](const Vector& x) { return Vector(a * x); },
               [a](const Vector&) { return a; });
    m.inverse_ = [a, source, target] {
      Eigen::FullPivLU<Matrix> lu(a);
      if (!lu.isInvertible())
        throw SingularError("linear map is not invertible");
      return linear(lu.inverse(), target, source).declared();
    };
    return m.validated();
  }

  /// x -> x + b.
  static ChartMap translation(const Vector& b)
  {
    return translation(b, Box::whole(static_cast<int>(b.size())));
  }
  static ChartMap translation(const Vector& b, const Box& source)
  {
    const int n = static_cast<int>(b.size());
    check_dimension(n);
    check_same_dimension(n, source.dim());
    const Box target{source.lower + b, source.upper + b};
    ChartMap m(MapKind::translation, source, target, [b](const Vector& x) { return Vector(x + b); },
               [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); });
    m.inverse_ = [b, target] { return translation(-b, target).declared(); };
    return m.validated();
  }

  /// Automorphism of the unit ball sending a to 0:
  /// ((1 - |a|^2)(x - a) - |x - a|^2 a) / (1 - 2 x.a + |x|^2 |a|^2).
  /// The default source is the cube inscribed in the unit ball.
  static ChartMap mobius_ball(const Vector& a)
  {
    const int n = static_cast<int>(a.size());
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    return mobius_ball(a, Box::cube(n, -s, s), Box::cube(n, -1.0, 1.0));
  }
  static ChartMap mobius_ball(const Vector& a, const Box& source, const Box& target)
  {
    const int n = static_cast<int>(a.size());
    check_dimension(n);
    check_same_dimension(n, source.dim());
    check_same_dimension(n, target.dim());
    const double a2 = a.squaredNorm();
    if (!(a2 < 1.0))
      throw CatalogError("mobius_ball parameter must lie in the open unit ball");
    auto denom = [a, a2](const Vector& x) {
      const double d = 1.0 - 2.0 * x.dot(a) + x.squaredNorm() * a2;
      if (!(std::abs(d) > 1e-300))
        throw DomainError("mobius_ball evaluated at its pole");
      return d;
    };
    ChartMap m(
        MapKind::mobius_ball, source, target,
        [a, a2, denom](const Vector& x) {
          const Vector xa = x - a;
          return Vector(((1.0 - a2) * xa - xa.squaredNorm() * a) / denom(x));
        },
        [a, a2, n, denom](const Vector& x) {
          const Vector xa = x - a;
          const double d = denom(x);
          const Vector num = (1.0 - a2) * xa - xa.squaredNorm() * a;
          const Matrix dnum = (1.0 - a2) * Matrix::Identity(n, n) - 2.0 * a * xa.transpose();
          const Vector dden = 2.0 * a2 * x - 2.0 * a;
          return Matrix(dnum / d - num * dden.transpose() / (d * d));
        });
    m.inverse_ = [a, source, target] { return mobius_ball(-a, target, source).declared(); };
    return m.validated();
  }

  /// x -> x |x|^(eps - 1).
  static ChartMap radial_stretch(int n, double eps) { return radial_stretch(n, eps, Box::cube(n, -1.0, 1.0)); }
  static ChartMap radial_stretch(int n, double eps, const Box& source)
  {
    check_dimension(n);
    check_same_dimension(n, source.dim());
    if (!(eps > 0.0) || !std::isfinite(eps))
      throw CatalogError("radial_stretch exponent must be positive");
    double rmax = 0.0;
    for (int i = 0; i < n; ++i)
      rmax += std::max(source.lower(i) * source.lower(i), source.upper(i) * source.upper(i));
    const double bound = std::pow(std::sqrt(rmax), eps);
    const Box target = std::isfinite(bound) ? Box::cube(n, -bound, bound) : Box::whole(n);
    auto radius = [](const Vector& x) {
      const double r = x.norm();
      if (!(r > 0.0))
        throw DomainError("radial_stretch evaluated at the origin");
      return r;
    };
    ChartMap m(
        MapKind::radial_stretch, source, target,
        [eps, radius](const Vector& x) { return Vector(x * std::pow(radius(x), eps - 1.0)); },
        [eps, n, radius](const Vector& x) {
          const double r = radius(x);
          return Matrix(std::pow(r, eps - 1.0) *
                        (Matrix::Identity(n, n) + (eps - 1.0) * x * x.transpose() / (r * r)));
        });
    m.inverse_ = [n, eps, target] { return radial_stretch(n, 1.0 / eps, target).declared(); };
    return m.validated();
  }

  /// second o first.
  static ChartMap composition(const ChartMap& first, const ChartMap& second)
  {
    check_same_dimension(first.dim(), second.dim());
    auto f = std::make_shared<const ChartMap>(first);
    auto s = std::make_shared<const ChartMap>(second);
    ChartMap m(
        MapKind::composition, first.source(), second.target(),
        [f, s](const Vector& x) { return (*s)(f->checked_apply(x)); },
        [f, s](const Vector& x) {
          const Vector y = f->checked_apply(x);
          return Matrix(s->jacobian(y) * f->jacobian(x));
        });
    m.parts_ = {f, s};
    m.inverse_ = [f, s] {
      if (!f->has_inverse() || !s->has_inverse())
        throw CatalogError("composition has no declared inverse");
      return composition(s->inverse(), f->inverse()).declared();
    };
    return m.validated();
  }

  int dim() const { return source_.dim(); }
  MapKind kind() const { return kind_; }
  const Box& source() const { return source_; }
  const Box& target() const { return target_; }

  /// Components (first, second) of a composition; empty otherwise.
  const std::vector<std::shared_ptr<const ChartMap>>& parts() const { return parts_; }

  bool has_inverse() const { return static_cast<bool>(inverse_); }
  ChartMap inverse() const
  {
    if (!inverse_)
      throw CatalogError(std::string(to_string(kind_)) + " map has no declared inverse");
    return inverse_();
  }

  /// Map value; p must lie in the source box.
  Vector operator()(const Vector& p) const
  {
    check_same_dimension(dim(), p.size());
    check_point(source_, p, "map argument");
    return apply_(p);
  }

  /// Map value, additionally checked against the target box.
  Vector checked_apply(const Vector& p) const
  {
    Vector y = (*this)(p);
    check_point(target_, y, "map image");
    return y;
  }

  Matrix jacobian(const Vector& p) const
  {
    check_same_dimension(dim(), p.size());
    check_point(source_, p, "jacobian argument");
    return jac_(p);
  }

  /// +1 or -1: the constant orientation found during validation.
  int orientation() const { return orientation_; }

  /// Central-difference Jacobian with step h * max(1, |x_i|).
  Matrix finite_difference_jacobian(const Vector& x, double h = 1e-6) const
  {
    const int n = dim();
    Matrix j(n, n);
    for (int i = 0; i < n; ++i)
    {
      const double step = h * std::max(1.0, std::abs(x(i)));
      Vector xp = x;
      Vector xm = x;
      xp(i) += step;
      xm(i) -= step;
      j.col(i) = (apply_(xp) - apply_(xm)) / (2.0 * step);
    }
    return j;
  }

  static constexpr std::size_t kValidationSamples = 100;
  static constexpr double kValidationTol = 1e-6;

private:
  ChartMap(MapKind k, Box src, Box tgt, Apply f, Jacobian j)
      : kind_(k), source_(std::move(src)), target_(std::move(tgt)), apply_(std::move(f)), jac_(std::move(j))
  {
  }

  static Box image_bounds(const Matrix& a, const Vector& b, const Box& source)
  {
    const int n = static_cast<int>(a.rows());
    Box t{b, b};
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
      {
        if (a(i, k) == 0.0)
          continue;
        const double u = a(i, k) * source.lower(k);
        const double v = a(i, k) * source.upper(k);
        t.lower(i) += std::min(u, v);
        t.upper(i) += std::max(u, v);
      }
    for (int i = 0; i < n; ++i)
    {
      if (std::isnan(t.lower(i)))
        t.lower(i) = -std::numeric_limits<double>::infinity();
      if (std::isnan(t.upper(i)))
        t.upper(i) = std::numeric_limits<double>::infinity();
    }
    return t;
  }

  ChartMap declared() const
  {
    ChartMap m = *this;
    m.kind_ = MapKind::declared_inverse;
    return m;
  }

  ChartMap validated()
  {
    int sign = 0;
    std::size_t checked = 0;
    for (const Vector& x : halton_points(source_, kValidationSamples))
    {
      Matrix j;
      Matrix fd;
      try
      {
        j = jac_(x);
        fd = finite_difference_jacobian(x);
      }
      catch (const DomainError&)
      {
        continue;
      }
      if (!j.allFinite())
        continue;
      if ((fd - j).norm() > kValidationTol * std::max(1.0, j.norm()))
        throw CatalogError(std::string(to_string(kind_)) +
                           " map: analytic Jacobian disagrees with finite differences");
      ++checked;
      if (near_singular(j))
        continue;
      const int s = j.determinant() > 0.0 ? 1 : -1;
      if (sign != 0 && s != sign)
        throw CatalogError(std::string(to_string(kind_)) + " map: Jacobian determinant changes sign");
      sign = s;
    }
    if (checked == 0)
      throw CatalogError(std::string(to_string(kind_)) + " map: no valid sample points in the source box");
    orientation_ = sign == 0 ? 1 : sign;
    return *this;
  }

  MapKind kind_;
  Box source_;
  Box target_;
  Apply apply_;
  Jacobian jac_;
  std::function<ChartMap()> inverse_;
  std::vector<std::shared_ptr<const ChartMap>> parts_;
  int orientation_ = 1;
};

}  // namespace qcdist
