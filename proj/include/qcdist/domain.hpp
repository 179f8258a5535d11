#pragma once

// Axis-aligned boxes, cell-centered grids and Halton sample sets.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "qcdist/linalg.hpp"

namespace qcdist {

/// Closed axis-aligned box; bounds may be infinite.
struct Box
{
  Vector lower;
  Vector upper;

  static Box whole(int n)
  {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
  }

  static Box cube(int n, double lo, double hi)
  {
    return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
  }

  int dim() const { return static_cast<int>(lower.size()); }

  bool contains(const Vector& x, double slack = 0.0) const
  {
    if (x.size() != lower.size())
      return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x(i) >= lower(i) - slack && x(i) <= upper(i) + slack))
        return false;
    return true;
  }

  bool finite() const { return lower.allFinite() && upper.allFinite(); }

  /// Largest finite side length, or 1 when every side is unbounded.
  double extent() const
  {
    double e = 0.0;
    for (Eigen::Index i = 0; i < lower.size(); ++i)
    {
      const double w = upper(i) - lower(i);
      if (std::isfinite(w))
        e = std::max(e, w);
    }
    return e > 0.0 ? e : 1.0;
  }

  /// Finite box used when sampling: unbounded sides are cut to length 2
  /// around the finite end (or [-1, 1] when both ends are open).
  Box sampling_box() const
  {
    Box b = *this;
    for (Eigen::Index i = 0; i < lower.size(); ++i)
    {
      const bool lo = std::isfinite(lower(i));
      const bool hi = std::isfinite(upper(i));
      if (!lo && !hi)
      {
        b.lower(i) = -1.0;
        b.upper(i) = 1.0;
      }
      else if (!lo)
        b.lower(i) = upper(i) - 2.0;
      else if (!hi)
        b.upper(i) = lower(i) + 2.0;
    }
    return b;
  }
};

inline void check_point(const Box& box, const Vector& x, const char* what)
{
  if (!box.contains(x))
    throw DomainError(std::string(what) + " outside its domain box");
}

/// Cell-centered nodes of a tensor grid; row-major with the last axis fastest.
inline std::vector<Vector> grid_nodes(const Box& box, const std::vector<int>& resolution)
{
  const int n = box.dim();
  if (static_cast<int>(resolution.size()) != n)
    throw DimensionError("grid resolution must list one count per axis");
  if (!box.finite())
    throw DomainError("grid box must be finite");
  std::vector<Vector> nodes;
  std::size_t total = 1;
  for (int r : resolution)
  {
    if (r < 0)
      throw DomainError("negative grid resolution");
    total *= static_cast<std::size_t>(r);
  }
  nodes.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < total; ++k)
  {
    Vector x(n);
    for (int i = 0; i < n; ++i)
    {
      const double h = (box.upper(i) - box.lower(i)) / resolution[static_cast<std::size_t>(i)];
      x(i) = box.lower(i) + (idx[static_cast<std::size_t>(i)] + 0.5) * h;
    }
    nodes.push_back(x);
    for (int i = n - 1; i >= 0; --i)
    {
      if (++idx[static_cast<std::size_t>(i)] < resolution[static_cast<std::size_t>(i)])
        break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  return nodes;
}

/// Radical inverse of `index` in base `base`.
inline double radical_inverse(std::size_t index, unsigned base)
{
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0)
  {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Halton points (indices 1..count) scaled into the sampling box.
inline std::vector<Vector> halton_points(const Box& box, std::size_t count)
{
  static constexpr std::array<unsigned, kMaxDimension> primes{2, 3, 5, 7, 11, 13, 17, 19};
  const Box b = box.sampling_box();
  const int n = b.dim();
  std::vector<Vector> pts;
  pts.reserve(count);
  for (std::size_t k = 1; k <= count; ++k)
  {
    Vector x(n);
    for (int i = 0; i < n; ++i)
      x(i) = b.lower(i) + radical_inverse(k, primes[static_cast<std::size_t>(i)]) * (b.upper(i) - b.lower(i));
    pts.push_back(x);
  }
  return pts;
}

}  // namespace qcdist
