#pragma once

// Closed catalog of Riemannian metrics on a chart domain.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qcdist/domain.hpp"
#include "qcdist/linalg.hpp"

namespace qcdist {

enum class MetricKind
{
  euclidean,
  conformal_flat,
  hyperbolic_halfspace,
  round_sphere_stereographic,
  constant_spd,
  custom_polynomial,
};

inline const char* to_string(MetricKind k)
{
  switch (k)
  {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::conformal_flat: return "conformal_flat";
    case MetricKind::hyperbolic_halfspace: return "hyperbolic_halfspace";
    case MetricKind::round_sphere_stereographic: return "round_sphere_stereographic";
    case MetricKind::constant_spd: return "constant_spd";
    case MetricKind::custom_polynomial: return "custom_polynomial";
  }
  return "?";
}

class MetricField
{
public:
  static MetricField euclidean(int n) { return euclidean(n, Box::whole(n)); }
  static MetricField euclidean(int n, Box domain)
  {
    check_dimension(n);
    return {MetricKind::euclidean, std::move(domain), [n](const Vector&) {
              return Matrix(Matrix::Identity(n, n));
            }};
  }

  /// exp(2 (log_scale + gradient . x)) I.
  static MetricField conformal_flat(double log_scale, const Vector& gradient)
  {
    return conformal_flat(log_scale, gradient, Box::whole(static_cast<int>(gradient.size())));
  }
  static MetricField conformal_flat(double log_scale, const Vector& gradient, Box domain)
  {
    const int n = static_cast<int>(gradient.size());
    check_dimension(n);
    return {MetricKind::conformal_flat, std::move(domain), [=](const Vector& x) {
              return Matrix(std::exp(2.0 * (log_scale + gradient.dot(x))) * Matrix::Identity(n, n));
            }};
  }

  /// I / x_n^2 on the upper half space x_n > 0.
  static MetricField hyperbolic_halfspace(int n)
  {
    Box b = Box::whole(n);
    b.lower(n - 1) = 0.0;
    return hyperbolic_halfspace(n, std::move(b));
  }
  static MetricField hyperbolic_halfspace(int n, Box domain)
  {
    check_dimension(n);
    return {MetricKind::hyperbolic_halfspace, std::move(domain), [n](const Vector& x) {
              const double t = x(n - 1);
              return Matrix(Matrix::Identity(n, n) / (t * t));
            }};
  }

  /// Round sphere of radius R in stereographic coordinates: 4 R^4 / (R^2 + |x|^2)^2 I.
  static MetricField round_sphere_stereographic(int n, double radius = 1.0)
  {
    return round_sphere_stereographic(n, radius, Box::whole(n));
  }
  static MetricField round_sphere_stereographic(int n, double radius, Box domain)
  {
    check_dimension(n);
    if (!(radius > 0.0))
      throw CatalogError("sphere radius must be positive");
    const double r2 = radius * radius;
    return {MetricKind::round_sphere_stereographic, std::move(domain), [=](const Vector& x) {
              const double s = r2 + x.squaredNorm();
              return Matrix(4.0 * r2 * r2 / (s * s) * Matrix::Identity(n, n));
            }};
  }

  static MetricField constant_spd(const SPDMatrix& a)
  {
    return constant_spd(a, Box::whole(a.dim()));
  }
  static MetricField constant_spd(const SPDMatrix& a, Box domain)
  {
    const Matrix m = a.matrix();
    return {MetricKind::constant_spd, std::move(domain), [m](const Vector&) { return m; }};
  }

  /// S_0 + sum_k x_k S_k; must be SPD wherever it is evaluated.
  static MetricField custom_polynomial(const SymMatrix& constant, const std::vector<SymMatrix>& linear,
                                       Box domain)
  {
    const int n = constant.dim();
    if (static_cast<int>(linear.size()) != n)
      throw CatalogError("custom_polynomial needs one linear coefficient matrix per coordinate");
    std::vector<Matrix> lin;
    for (const auto& s : linear)
    {
      check_same_dimension(n, s.dim());
      lin.push_back(s.matrix());
    }
    const Matrix c = constant.matrix();
    return {MetricKind::custom_polynomial, std::move(domain), [c, lin](const Vector& x) {
              Matrix m = c;
              for (std::size_t k = 0; k < lin.size(); ++k)
                m += x(static_cast<Eigen::Index>(k)) * lin[k];
              return m;
            }};
  }

  int dim() const { return domain_.dim(); }
  MetricKind kind() const { return kind_; }
  const Box& domain() const { return domain_; }

  /// Every catalog entry except constant_spd and custom_polynomial is a
  /// scalar multiple of the Euclidean metric.
  bool conformally_flat() const
  {
    return kind_ != MetricKind::constant_spd && kind_ != MetricKind::custom_polynomial;
  }

  SPDMatrix at(const Vector& x) const
  {
    check_same_dimension(dim(), x.size());
    check_point(domain_, x, "metric evaluation point");
    return SPDMatrix(eval_(x));
  }

private:
  MetricField(MetricKind k, Box d, std::function<Matrix(const Vector&)> f)
      : kind_(k), domain_(std::move(d)), eval_(std::move(f))
  {
  }

  MetricKind kind_;
  Box domain_;
  std::function<Matrix(const Vector&)> eval_;
};

}  // namespace qcdist
