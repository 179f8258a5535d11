#pragma once

// Scalar functions on a chart domain with analytic gradients.

#include <cmath>
#include <functional>
#include <vector>

#include "qcdist/linalg.hpp"

namespace qcdist {

/// One monomial c * prod_i x_i^{k_i}.
struct Monomial
{
  double coefficient = 0.0;
  std::vector<int> powers;
};

class ScalarField
{
public:
  static ScalarField constant(int n, double c)
  {
    return {n, [c](const Vector&) { return c; }, [n](const Vector&) { return Vector(Vector::Zero(n)); }};
  }

  static ScalarField coordinate(int n, int i)
  {
    if (i < 0 || i >= n)
      throw CatalogError("coordinate index out of range");
    return {n, [i](const Vector& x) { return x(i); },
            [n, i](const Vector&) {
              Vector g = Vector::Zero(n);
              g(i) = 1.0;
              return g;
            }};
  }

  static ScalarField polynomial(int n, const std::vector<Monomial>& terms)
  {
    for (const auto& t : terms)
    {
      if (static_cast<int>(t.powers.size()) != n)
        throw CatalogError("monomial needs one exponent per coordinate");
      for (int k : t.powers)
        if (k < 0)
          throw CatalogError("negative monomial exponent");
    }
    auto value = [terms](const Vector& x) {
      double s = 0.0;
      for (const auto& t : terms)
      {
        double m = t.coefficient;
        for (std::size_t i = 0; i < t.powers.size(); ++i)
          m *= std::pow(x(static_cast<Eigen::Index>(i)), t.powers[i]);
        s += m;
      }
      return s;
    };
    auto grad = [terms, n](const Vector& x) {
      Vector g = Vector::Zero(n);
      for (const auto& t : terms)
        for (int j = 0; j < n; ++j)
        {
          const int kj = t.powers[static_cast<std::size_t>(j)];
          if (kj == 0)
            continue;
          double m = t.coefficient * kj;
          for (int i = 0; i < n; ++i)
            m *= std::pow(x(i), i == j ? kj - 1 : t.powers[static_cast<std::size_t>(i)]);
          g(j) += m;
        }
      return g;
    };
    return {n, value, grad};
  }

  /// amplitude * exp(-|x - center|^2 / (2 width^2)).
  static ScalarField gaussian(const Vector& center, double width, double amplitude = 1.0)
  {
    if (!(width > 0.0))
      throw CatalogError("gaussian width must be positive");
    const int n = static_cast<int>(center.size());
    const double w2 = width * width;
    auto value = [=](const Vector& x) { return amplitude * std::exp(-(x - center).squaredNorm() / (2.0 * w2)); };
    return {n, value, [=](const Vector& x) { return Vector(-(x - center) / w2 * value(x)); }};
  }

  int dim() const { return n_; }

  double operator()(const Vector& x) const
  {
    check_same_dimension(n_, x.size());
    return value_(x);
  }

  Vector gradient(const Vector& x) const
  {
    check_same_dimension(n_, x.size());
    return grad_(x);
  }

private:
  ScalarField(int n, std::function<double(const Vector&)> v, std::function<Vector(const Vector&)> g)
      : n_(n), value_(std::move(v)), grad_(std::move(g))
  {
    check_dimension(n);
  }

  int n_;
  std::function<double(const Vector&)> value_;
  std::function<Vector(const Vector&)> grad_;
};

}  // namespace qcdist
