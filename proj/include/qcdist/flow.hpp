#pragma once

// Distortion along the flow of a vector field: Lie derivative of the metric,
// the Ahlfors operator, a fixed-step RK4 integration of the flow and its
// Jacobian, and the time-derivative identity for K(t).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qcdist/domain.hpp"
#include "qcdist/metric_field.hpp"
#include "qcdist/scalar_field.hpp"
#include "qcdist/tensor_core.hpp"

namespace qcdist {

enum class FieldKind
{
  linear,
  conformal_killing,
  killing_rotation,
  polynomial,
};

inline const char* to_string(FieldKind k)
{
  switch (k)
  {
    case FieldKind::linear: return "linear";
    case FieldKind::conformal_killing: return "conformal_killing";
    case FieldKind::killing_rotation: return "killing_rotation";
    case FieldKind::polynomial: return "polynomial";
  }
  return "?";
}

class VectorField
{
public:
  /// X(x) = A x + b.
  static VectorField linear(const Matrix& a, const Vector& b)
  {
    if (a.rows() != a.cols())
      throw DimensionError("linear field needs a square matrix");
    check_same_dimension(a.rows(), b.size());
    return VectorField(FieldKind::linear, static_cast<int>(a.rows()),
                       [a, b](const Vector& x) { return Vector(a * x + b); },
                       [a](const Vector&) { return a; });
  }
  static VectorField linear(const Matrix& a) { return linear(a, Vector::Zero(a.rows())); }

  /// Conformal Killing field of the Euclidean metric:
  /// X = t + s x + W x + 2 (c.x) x - |x|^2 c with W skew.
  static VectorField conformal_killing(const Vector& t, double s, const Matrix& w, const Vector& c)
  {
    const int n = static_cast<int>(t.size());
    check_same_dimension(n, c.size());
    check_same_dimension(n, w.rows());
    check_same_dimension(n, w.cols());
    if (!(w + w.transpose()).isZero(0.0))
      throw CatalogError("conformal_killing rotation part must be skew-symmetric");
    return VectorField(
        FieldKind::conformal_killing, n,
        [=](const Vector& x) { return Vector(t + s * x + w * x + 2.0 * c.dot(x) * x - x.squaredNorm() * c); },
        [=](const Vector& x) {
          return Matrix((s + 2.0 * c.dot(x)) * Matrix::Identity(n, n) + w + 2.0 * x * c.transpose() -
                        2.0 * c * x.transpose());
        });
  }

  /// X = W (x - center) with W skew.
  static VectorField killing_rotation(const Matrix& w, const Vector& center)
  {
    check_same_dimension(w.rows(), center.size());
    if (w.rows() != w.cols() || !(w + w.transpose()).isZero(0.0))
      throw CatalogError("killing_rotation needs a skew-symmetric matrix");
    return VectorField(FieldKind::killing_rotation, static_cast<int>(w.rows()),
                       [w, center](const Vector& x) { return Vector(w * (x - center)); },
                       [w](const Vector&) { return w; });
  }

  /// One polynomial per component.
  static VectorField polynomial(const std::vector<ScalarField>& components)
  {
    const int n = static_cast<int>(components.size());
    check_dimension(n);
    for (const auto& c : components)
      check_same_dimension(n, c.dim());
    return VectorField(
        FieldKind::polynomial, n,
        [components, n](const Vector& x) {
          Vector v(n);
          for (int k = 0; k < n; ++k)
            v(k) = components[static_cast<std::size_t>(k)](x);
          return v;
        },
        [components, n](const Vector& x) {
          Matrix j(n, n);
          for (int k = 0; k < n; ++k)
            j.row(k) = components[static_cast<std::size_t>(k)].gradient(x).transpose();
          return j;
        });
  }

  int dim() const { return n_; }
  FieldKind kind() const { return kind_; }

  Vector operator()(const Vector& x) const
  {
    check_same_dimension(n_, x.size());
    return f_(x);
  }

  /// J(k, i) = d X^k / d x^i.
  Matrix jacobian(const Vector& x) const
  {
    check_same_dimension(n_, x.size());
    return j_(x);
  }

private:
  VectorField(FieldKind k, int n, std::function<Vector(const Vector&)> f, std::function<Matrix(const Vector&)> j)
      : kind_(k), n_(n), f_(std::move(f)), j_(std::move(j))
  {
    check_dimension(n);
    for (const Vector& x : halton_points(Box::cube(n, -1.0, 1.0), 100))
    {
      const Matrix a = j_(x);
      Matrix fd(n, n);
      for (int i = 0; i < n; ++i)
      {
        const double h = 1e-6;
        Vector xp = x;
        Vector xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd.col(i) = (f_(xp) - f_(xm)) / (2.0 * h);
      }
      if ((fd - a).norm() > 1e-6 * std::max(1.0, a.norm()))
        throw CatalogError(std::string(to_string(kind_)) + " field: Jacobian disagrees with finite differences");
    }
  }

  FieldKind kind_;
  int n_;
  std::function<Vector(const Vector&)> f_;
  std::function<Matrix(const Vector&)> j_;
};

/// Central-difference step for metric derivatives: 1e-5 times the domain extent.
inline double metric_fd_step(const MetricField& g)
{
  return 1e-5 * g.domain().extent();
}

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k.
inline SymMatrix lie_derivative_metric(const VectorField& x, const MetricField& g, const Vector& p)
{
  const int n = g.dim();
  check_same_dimension(n, x.dim());
  check_same_dimension(n, p.size());
  const double h = metric_fd_step(g);
  const Vector v = x(p);
  const Matrix gp = g.at(p).matrix();
  Matrix out = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
  {
    Vector xp = p;
    Vector xm = p;
    xp(k) += h;
    xm(k) -= h;
    if (!g.domain().contains(xp) || !g.domain().contains(xm))
      throw DomainError("point too close to the domain boundary for the difference stencil");
    if (v(k) != 0.0)
      out += v(k) * (g.at(xp).matrix() - g.at(xm).matrix()) / (2.0 * h);
  }
  const Matrix j = x.jacobian(p);
  out += j.transpose() * gp + gp * j;
  return SymMatrix(Matrix(0.5 * (out + out.transpose())));
}

/// SX = L_X g - Tr_g(L_X g) g.
inline SymMatrix ahlfors_operator(const VectorField& x, const MetricField& g, const Vector& p)
{
  const SymMatrix l = lie_derivative_metric(x, g, p);
  const SPDMatrix gp = g.at(p);
  return SymMatrix(Matrix(l.matrix() - invariant_trace(gp, l) * gp.matrix()));
}

struct FlowTrace
{
  int n = 0;
  std::vector<double> times;
  /// max over sample points of K(g, phi_t^* g).
  std::vector<double> k_of_t;
  /// exp(t n ||SX||_inf / 2).
  std::vector<double> bound_of_t;
  /// Filled by kdot_identity_check; NaN where no centered difference exists.
  std::vector<double> kdot_residuals;
  /// Per time and sample point: K_p(t) and the right side of the K-dot identity.
  std::vector<std::vector<double>> k_points;
  std::vector<std::vector<double>> kdot_rhs;
  /// Sup of ||SX||_g over every visited trajectory point.
  double sx_sup = 0.0;
  std::size_t samples = 0;
  bool truncated = false;
  bool certificate = false;

  static constexpr double kGridSlack = 1e-6;
};

namespace detail {

struct FlowState
{
  Vector x;
  Matrix d;
};

inline FlowState flow_rhs(const VectorField& f, const FlowState& s)
{
  return {f(s.x), f.jacobian(s.x) * s.d};
}

inline FlowState rk4_step(const VectorField& f, const FlowState& s, double dt)
{
  auto shift = [](const FlowState& a, const FlowState& k, double c) { return FlowState{a.x + c * k.x, a.d + c * k.d}; };
  const FlowState k1 = flow_rhs(f, s);
  const FlowState k2 = flow_rhs(f, shift(s, k1, 0.5 * dt));
  const FlowState k3 = flow_rhs(f, shift(s, k2, 0.5 * dt));
  const FlowState k4 = flow_rhs(f, shift(s, k3, dt));
  return {s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.d + dt / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d)};
}

}  // namespace detail

/// Fixed-step RK4 integration of the flow of x and of its Jacobian from every
/// sample point; stops early (truncated) once a trajectory leaves the
/// metric's domain or its difference stencil.
inline FlowTrace integrate_flow(const VectorField& x, const MetricField& g, double t_max, int steps,
                                const std::vector<Vector>& samples)
{
  const int n = g.dim();
  check_same_dimension(n, x.dim());
  if (steps < 1 || !(t_max > 0.0) || !std::isfinite(t_max))
    throw DomainError("flow needs t_max > 0 and at least one step");
  const double dt = t_max / steps;
  if (!(dt > 1e-14 * t_max))
    throw NumericalError("flow step size underflow");
  if (samples.empty())
    throw DomainError("flow needs at least one sample point");

  FlowTrace tr;
  tr.n = n;
  tr.samples = samples.size();
  std::vector<detail::FlowState> state;
  std::vector<SPDMatrix> g0;
  for (const Vector& p : samples)
  {
    state.push_back({p, Matrix::Identity(n, n)});
    g0.push_back(g.at(p));
  }

  for (int k = 0; k <= steps; ++k)
  {
    std::vector<double> kp;
    std::vector<double> rhs;
    double sx = tr.sx_sup;
    try
    {
      for (std::size_t i = 0; i < state.size(); ++i)
      {
        const auto& s = state[i];
        check_point(g.domain(), s.x, "flow trajectory");
        const SPDMatrix gx = g.at(s.x);
        const SymMatrix lie = lie_derivative_metric(x, g, s.x);
        const double tr_lie = invariant_trace(gx, lie);
        sx = std::max(sx, tensor_norm(gx, Matrix(lie.matrix() - tr_lie * gx.matrix())));

        const SPDMatrix gt(Matrix(s.d.transpose() * gx.matrix() * s.d));
        const Matrix gdot = s.d.transpose() * lie.matrix() * s.d;
        const double k2 = distortion_k2(g0[i], gt).k_squared;
        const double kk = std::sqrt(k2);
        const double trace_gt = invariant_trace(g0[i], gt);
        const double trt = invariant_trace(gt, SymMatrix(gdot));
        const double inner = invariant_trace(g0[i], SymMatrix(Matrix(gdot - trt * gt.matrix())));
        kp.push_back(kk);
        rhs.push_back(kk * (0.5 * n) / trace_gt * inner);
      }
    }
    catch (const DomainError&)
    {
      tr.truncated = true;
      break;
    }
    tr.sx_sup = sx;
    tr.times.push_back(k * dt);
    tr.k_of_t.push_back(*std::max_element(kp.begin(), kp.end()));
    tr.k_points.push_back(std::move(kp));
    tr.kdot_rhs.push_back(std::move(rhs));
    if (k == steps)
      break;
    for (auto& s : state)
      s = detail::rk4_step(x, s, dt);
  }

  tr.certificate = !tr.times.empty();
  for (std::size_t k = 0; k < tr.times.size(); ++k)
  {
    tr.bound_of_t.push_back(std::exp(tr.times[k] * n * tr.sx_sup / 2.0));
    if (!(tr.k_of_t[k] <= tr.bound_of_t[k] * (1.0 + FlowTrace::kGridSlack)))
      tr.certificate = false;
  }
  tr.kdot_residuals.assign(tr.times.size(), std::numeric_limits<double>::quiet_NaN());
  return tr;
}

/// Centered difference of K_p(t) against the right side of the identity
///   K' = K (n/2) / Tr_g(g(t)) * Tr_g(g'(t) - Tr_{g(t)}(g'(t)) g(t))
/// at interior times; residuals are relative to max(|rhs|, K). Returns the max.
inline double kdot_identity_check(FlowTrace& tr)
{
  const std::size_t m = tr.times.size();
  if (m < 3)
    throw DomainError("K-dot check needs at least three time samples");
  tr.kdot_residuals.assign(m, std::numeric_limits<double>::quiet_NaN());
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < m; ++k)
  {
    const double h = tr.times[k + 1] - tr.times[k - 1];
    double r = 0.0;
    for (std::size_t i = 0; i < tr.k_points[k].size(); ++i)
    {
      const double fd = (tr.k_points[k + 1][i] - tr.k_points[k - 1][i]) / h;
      const double rhs = tr.kdot_rhs[k][i];
      r = std::max(r, std::abs(fd - rhs) / std::max(std::abs(rhs), tr.k_points[k][i]));
    }
    tr.kdot_residuals[k] = r;
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace qcdist
