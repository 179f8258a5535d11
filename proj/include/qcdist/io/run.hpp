#pragma once

// Command dispatch: reads a configuration document, runs one experiment and
// collects records and certificates into a ResultBundle.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "qcdist/io/config.hpp"
#include "qcdist/io/result.hpp"

namespace qcdist::io {

enum ExitCode : int
{
  kExitOk = 0,
  kExitCertificate = 1,
  kExitSchema = 2,
  kExitNumerical = 3,
};

inline constexpr const char* kCommands[] = {"distortion", "meb", "tukia", "flow", "certify"};

namespace detail {

using Rng = std::mt19937_64;

/// Q diag(exp(spread * N(0, 1))) Q^T with Q from the QR factor of a Gaussian matrix.
inline SPDMatrix random_spd(int n, Rng& rng, double spread)
{
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = nd(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(m).householderQ();
  Vector d(n);
  for (int i = 0; i < n; ++i)
    d(i) = std::exp(spread * nd(rng));
  return SPDMatrix(Matrix(q * d.asDiagonal() * q.transpose()));
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline CertificateEntry from_sweep(const std::string& name, const SweepCertificate& c)
{
  return {name, c.pass, c.samples ? c.worst_margin : nan(), c.samples};
}

/// Certificate over checks lhs <= rhs.
struct Tally
{
  std::string name;
  bool pass = true;
  double worst = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;

  void add(const InequalityCheck& c)
  {
    ++samples;
    pass = pass && c.holds();
    worst = std::min(worst, c.margin());
  }
  /// lhs <= rhs with no slack; margin relative to rhs.
  void add_strict(double lhs, double rhs)
  {
    ++samples;
    pass = pass && lhs <= rhs;
    worst = std::min(worst, (rhs - lhs) / rhs);
  }
  CertificateEntry entry() const { return {name, pass && samples > 0, samples ? worst : nan(), samples}; }
};

inline std::vector<std::string> point_columns(int n)
{
  std::vector<std::string> c;
  for (int i = 0; i < n; ++i)
    c.push_back("x" + std::to_string(i));
  return c;
}

inline std::optional<double> optional_double(ObjectReader& r, const char* key)
{
  if (const Json* v = r.optional(key))
    return as_double(*v, r.child(key));
  return std::nullopt;
}

inline std::vector<Vector> samples_or_default(ObjectReader& r, int n, const ChartMap& map, std::size_t count)
{
  if (const Json* s = r.optional("samples"))
    return parse_samples(*s, r.child("samples"), n, count);
  return default_samples(map, count);
}

// ---------------------------------------------------------------- distortion

inline std::function<void(ResultBundle&)> prepare_distortion(ObjectReader& r, int n)
{
  const MetricField g = parse_metric(r.require("g"), r.child("g"), n);
  const MetricField h = r.has("h") ? parse_metric(*r.optional("h"), r.child("h"), n) : g;
  const ChartMap map = parse_map(r.require("map"), r.child("map"), n);
  const std::vector<Vector> grid = parse_grid(r.require("grid"), r.child("grid"), n);
  const std::optional<double> k2_bound = optional_double(r, "k2_bound");
  return [=](ResultBundle& out) {
    out.columns = point_columns(n);
    for (const char* c : {"k_squared", "lambda_min", "lambda_max", "riem_jacobian", "jac_sign", "singular"})
      out.columns.emplace_back(c);
    Tally ratio{"ratio_bound"};
    Tally qr{"quasiregular"};
    Tally riem{"riem_jacobian"};
    double kmax = 0.0;
    double kmin = std::numeric_limits<double>::infinity();
    std::size_t singular = 0;
    for (const Vector& p : grid)
    {
      const DistortionReport d = map_distortion(map, g, h, p, k2_bound);
      std::vector<Json> row;
      for (int i = 0; i < n; ++i)
        row.emplace_back(p(i));
      row.emplace_back(d.k_squared);
      row.emplace_back(d.eigenvalues.front());
      row.emplace_back(d.eigenvalues.back());
      row.emplace_back(d.riem_jacobian);
      row.emplace_back(d.jac_sign);
      row.emplace_back(d.singular);
      out.rows.push_back(std::move(row));
      const Vector y = map(p);
      const double direct = std::abs(map.jacobian(p).determinant()) *
                            std::sqrt(h.at(y).matrix().determinant() / g.at(p).matrix().determinant());
      riem.add_strict(std::abs(d.riem_jacobian - direct), 1e-9 * std::max(direct, tol::abs));
      if (d.singular)
      {
        ++singular;
        continue;
      }
      kmax = std::max(kmax, d.k_squared);
      kmin = std::min(kmin, d.k_squared);
      const double nn = std::pow(double(n), n);
      ratio.add({d.eigenvalues.back() / d.eigenvalues.front(), nn * d.k_squared});
      if (k2_bound)
        qr.add({d.k_squared, *k2_bound});
    }
    out.summary["points"] = grid.size();
    out.summary["singular_points"] = singular;
    out.summary["max_k_squared"] = grid.size() > singular ? kmax : nan();
    out.summary["min_k_squared"] = grid.size() > singular ? kmin : nan();
    // An empty grid certifies nothing and fails nothing.
    auto vacuous = [&](CertificateEntry e) {
      if (e.samples == 0)
        e.pass = true;
      return e;
    };
    out.certificates.push_back(vacuous(ratio.entry()));
    out.certificates.push_back(vacuous(riem.entry()));
    if (k2_bound)
      out.certificates.push_back(vacuous(qr.entry()));
  };
}

// ----------------------------------------------------------------------- meb

inline std::function<void(ResultBundle&)> prepare_meb(ObjectReader& r, int n, std::uint64_t seed)
{
  const Json* pts = r.optional("points");
  const Json* rnd = r.optional("random");
  const SolverConfig cfg = parse_solver(r.optional("solver"), r.child("solver"));
  if ((pts == nullptr) == (rnd == nullptr))
    schema_error(r.path(), "expected exactly one of 'points' or 'random'");
  std::vector<SPDPoint> points;
  if (pts)
  {
    if (!pts->is_array() || pts->empty())
      schema_error(r.child("points"), "expected a non-empty array of SPD matrices");
    for (std::size_t i = 0; i < pts->size(); ++i)
      points.emplace_back(as_spd((*pts)[i], r.child("points") + "[" + std::to_string(i) + "]", n).matrix());
  }
  else
  {
    ObjectReader q(*rnd, r.child("random"));
    const auto count = as_int(q.require("count"), q.child("count"));
    const double spread = q.has("spread") ? as_double(*q.optional("spread"), q.child("spread")) : 1.0;
    q.finish();
    if (count < 1 || count > 100000)
      schema_error(q.child("count"), "count outside [1, 100000]");
    Rng rng(seed);
    for (long long i = 0; i < count; ++i)
      points.emplace_back(random_spd(n, rng, spread).matrix());
  }
  return [=](ResultBundle& out) {
    const BallResult b = minimal_enclosing_ball(points, cfg);
    out.columns = {"index", "distance", "slack"};
    Tally enclosure{"enclosure"};
    for (std::size_t i = 0; i < points.size(); ++i)
    {
      const double d = distance(b.center, points[i]);
      out.rows.push_back({Json(i), Json(d), Json(b.radius - d)});
      enclosure.add({d, b.radius + cfg.tol});
    }
    Json center = Json::array();
    for (int i = 0; i < n; ++i)
    {
      Json row = Json::array();
      for (int j = 0; j < n; ++j)
        row.push_back(b.center.matrix()(i, j));
      center.push_back(row);
    }
    out.summary["points"] = points.size();
    out.summary["radius"] = b.radius;
    out.summary["residual"] = b.residual;
    out.summary["iterations"] = b.iterations;
    out.summary["converged"] = b.converged;
    out.summary["center"] = center;
    out.certificates.push_back({"converged", b.converged, b.converged ? 0.0 : -1.0, 1});
    Tally resid{"ball_residual"};
    resid.add({b.residual, cfg.tol});
    out.certificates.push_back(resid.entry());
    out.certificates.push_back(enclosure.entry());
  };
}

// --------------------------------------------------------------------- tukia

inline std::function<void(ResultBundle&)> prepare_tukia(ObjectReader& r, int n)
{
  const MetricField g = parse_metric(r.require("g"), r.child("g"), n);
  const QCGroup group = parse_group(r.require("group"), r.child("group"), n);
  const std::vector<Vector> grid = parse_grid(r.require("grid"), r.child("grid"), n);
  const SolverConfig cfg = parse_solver(r.optional("solver"), r.child("solver"));
  const double beltrami_tol = optional_double(r, "beltrami_tol").value_or(1e-7);
  return [=](ResultBundle& out) {
    out.columns = point_columns(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        out.columns.push_back("h" + std::to_string(i) + std::to_string(j));
    for (const char* c : {"radius", "diameter", "residual", "beltrami", "converged", "skipped"})
      out.columns.emplace_back(c);
    out.summary["points"] = grid.size();
    out.summary["order"] = group.order();
    out.summary["diameter_bound"] = group.diameter_bound();

    const std::vector<std::string> names = {"group_axioms", "orbit_diameter", "equivariance", "beltrami",
                                            "unit_determinant", "converged"};
    std::string axioms_error;
    try
    {
      group.verify(g, grid);
    }
    catch (const CatalogError& e)
    {
      axioms_error = e.what();
    }
    if (!axioms_error.empty())
    {
      out.summary["group_axioms_error"] = axioms_error;
      for (const auto& nm : names)
        out.certificates.push_back({nm, false, nan(), 0});
      return;
    }

    const InvariantStructure s = solve_invariant_structure(group, g, grid, cfg);
    const auto bel = beltrami_residual(s, group, g);
    Tally diam{"orbit_diameter"};
    Tally equi{"equivariance"};
    Tally belt{"beltrami"};
    Tally udet{"unit_determinant"};
    Tally conv{"converged"};
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
      std::vector<Json> row;
      for (int i = 0; i < n; ++i)
        row.emplace_back(grid[k](i));
      if (s.skipped[k])
      {
        for (int i = 0; i < n * (n + 1) / 2 + 4; ++i)
          row.emplace_back(nan());
        row.emplace_back(false);
        row.emplace_back(true);
        out.rows.push_back(std::move(row));
        continue;
      }
      const SPDMatrix hf = fiber_tensor(g, grid[k], s.h_field[k]);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          row.emplace_back(hf.matrix()(i, j));
      double res = 0.0;
      for (double v : s.residuals[k])
        res = std::max(res, v);
      double b = 0.0;
      for (double v : bel[k])
        b = std::max(b, v);
      row.emplace_back(s.radius[k]);
      row.emplace_back(s.diameter[k]);
      row.emplace_back(res);
      row.emplace_back(b);
      row.emplace_back(static_cast<bool>(s.converged[k]));
      row.emplace_back(false);
      out.rows.push_back(std::move(row));

      diam.add({s.diameter[k], group.diameter_bound()});
      equi.add({res, 10.0 * s.tol});
      belt.add({b, beltrami_tol});
      udet.add_strict(std::abs(invariant_det(g.at(grid[k]), hf) - 1.0), 1e-10);
      conv.add({s.converged[k] ? 0.0 : 1.0, 0.0});
    }
    out.summary["skipped_points"] = s.skipped_count();
    out.summary["max_residual"] = s.max_residual();
    out.certificates.push_back({"group_axioms", true, 0.0, grid.size()});
    for (Tally* t : {&diam, &equi, &belt, &udet, &conv})
    {
      CertificateEntry e = t->entry();
      if (t->samples == 0)
        e.pass = true;
      out.certificates.push_back(e);
    }
  };
}

// ---------------------------------------------------------------------- flow

inline std::function<void(ResultBundle&)> prepare_flow(ObjectReader& r, int n)
{
  const VectorField x = parse_field(r.require("field"), r.child("field"), n);
  const MetricField g = parse_metric(r.require("g"), r.child("g"), n);
  const double t_max = as_double(r.require("t_max"), r.child("t_max"));
  const auto steps = r.has("steps") ? as_int(*r.optional("steps"), r.child("steps")) : 1000;
  const std::vector<Vector> samples = parse_samples(r.require("samples"), r.child("samples"), n, 512);
  const double kdot_tol = optional_double(r, "kdot_tol").value_or(1e-4);
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    schema_error(r.child("t_max"), "must be positive and finite");
  if (steps < 2 || steps > 10000000)
    schema_error(r.child("steps"), "outside [2, 10000000]");
  return [=](ResultBundle& out) {
    FlowTrace tr = integrate_flow(x, g, t_max, static_cast<int>(steps), samples);
    double kdot = nan();
    if (tr.times.size() >= 3)
      kdot = kdot_identity_check(tr);
    else
      tr.kdot_residuals.assign(tr.times.size(), nan());
    out.columns = {"t", "K", "bound", "residual"};
    Tally gron{"gronwall"};
    for (std::size_t k = 0; k < tr.times.size(); ++k)
    {
      out.rows.push_back({Json(tr.times[k]), Json(tr.k_of_t[k]), Json(tr.bound_of_t[k]), Json(tr.kdot_residuals[k])});
      gron.add({tr.k_of_t[k], tr.bound_of_t[k] * (1.0 + FlowTrace::kGridSlack)});
    }
    out.summary["samples"] = tr.samples;
    out.summary["sx_sup"] = tr.sx_sup;
    out.summary["truncated"] = tr.truncated;
    out.summary["final_t"] = tr.times.back();
    out.summary["final_K"] = tr.k_of_t.back();
    out.summary["max_kdot_residual"] = kdot;
    CertificateEntry ge = gron.entry();
    ge.samples = tr.samples;
    out.certificates.push_back(ge);
    const bool kdot_ok = std::isfinite(kdot) && kdot <= kdot_tol;
    out.certificates.push_back(
        {"kdot_identity", kdot_ok, std::isfinite(kdot) ? (kdot_tol - kdot) / kdot_tol : nan(), tr.samples});
  };
}

// ------------------------------------------------------------------- certify

using CheckRun = std::function<std::pair<CertificateEntry, std::size_t>(Rng&)>;

inline CheckRun prepare_tensor_sweep(ObjectReader& c, const std::string& type, int n)
{
  const auto count = as_int(c.require("count"), c.child("count"));
  const double spread = c.has("spread") ? as_double(*c.optional("spread"), c.child("spread")) : 1.0;
  if (count < 1 || count > 10000000)
    schema_error(c.child("count"), "outside [1, 10000000]");
  return [=](Rng& rng) {
    Tally t{""};
    for (long long i = 0; i < count; ++i)
    {
      const SPDMatrix a = random_spd(n, rng, spread);
      const SPDMatrix b = random_spd(n, rng, spread);
      if (type == "submultiplicativity")
        t.add(evaluate_submultiplicativity(a, b, random_spd(n, rng, spread)));
      else if (type == "inverse_bound")
        t.add(evaluate_inverse_bound(a, b));
      else
        t.add(evaluate_ratio_bound(distortion_k2(a, b)));
    }
    return std::make_pair(t.entry(), std::size_t{0});
  };
}

inline CheckRun prepare_check(ObjectReader& c, const std::string& type, int n)
{
  auto metric = [&](const char* key) { return parse_metric(c.require(key), c.child(key), n); };
  auto chart = [&](const char* key) { return parse_map(c.require(key), c.child(key), n); };
  auto sweep = [](SweepCertificate s) { return std::make_pair(from_sweep("", s), s.excluded); };

  if (type == "submultiplicativity" || type == "inverse_bound" || type == "ratio_bound")
    return prepare_tensor_sweep(c, type, n);
  if (type == "localization")
  {
    const ChartMap m = chart("map");
    const MetricField g = metric("g"), h = metric("h");
    const ChartMap cg = chart("chart_g"), ch = chart("chart_h");
    const auto pts = samples_or_default(c, n, m, 1000);
    return [=](Rng&) { return sweep(check_localization_bound(m, g, h, cg, ch, pts)); };
  }
  if (type == "composition")
  {
    const ChartMap phi = chart("first"), psi = chart("second");
    const MetricField g = metric("g"), h = metric("h"), k = metric("k");
    const auto pts = samples_or_default(c, n, phi, 1000);
    return [=](Rng&) { return sweep(check_composition_bound(phi, psi, g, h, k, pts)); };
  }
  if (type == "inverse")
  {
    const ChartMap m = chart("map");
    const MetricField g = metric("g"), h = metric("h");
    if (!m.has_inverse())
      schema_error(c.child("map"), "map has no declared inverse");
    const auto pts = samples_or_default(c, n, m, 1000);
    return [=](Rng&) { return sweep(check_inverse_bound_map(m, g, h, pts)); };
  }
  if (type == "gradient")
  {
    const ChartMap m = chart("map");
    const MetricField g = metric("g"), h = metric("h");
    const ScalarField u = parse_scalar(c.require("u"), c.child("u"), n);
    const auto pts = samples_or_default(c, n, m, 1000);
    return [=](Rng&) { return sweep(check_gradient_bound(m, g, h, u, pts)); };
  }
  if (type == "conformal")
  {
    const ChartMap m = chart("map");
    const MetricField g = metric("g"), h = metric("h");
    const double tol = optional_double(c, "tol").value_or(1e-8);
    const auto pts = samples_or_default(c, n, m, kDefaultSamples);
    return [=](Rng&) {
      Tally t{""};
      std::size_t excluded = 0;
      for (const auto& e : qcdist::detail::sweep_distortion(m, g, h, pts, excluded))
        t.add({e.k2.k_squared, 1.0 + tol});
      return std::make_pair(t.entry(), excluded);
    };
  }
  if (type == "substitution")
  {
    const ChartMap m = chart("map");
    const MetricField g = metric("g"), h = metric("h");
    const ScalarField f = parse_scalar(c.require("f"), c.child("f"), n);
    const Region src = parse_region(c.require("source"), c.child("source"), n);
    std::optional<Region> tgt;
    if (const Json* t = c.optional("target"))
      tgt = parse_region(*t, c.child("target"), n);
    else
      tgt = image_region(m, src);
    if (!tgt)
      schema_error(c.path(), "image region cannot be derived for this map; give 'target'");
    if (!m.has_inverse())
      schema_error(c.child("map"), "map has no declared inverse");
    std::vector<int> res = {16, 32, 64};
    if (const Json* rs = c.optional("resolutions"))
    {
      if (!rs->is_array() || rs->empty())
        schema_error(c.child("resolutions"), "expected a non-empty array");
      res.clear();
      for (const auto& v : *rs)
      {
        const auto m_i = as_int(v, c.child("resolutions"));
        if (m_i < 1 || m_i > 4096)
          schema_error(c.child("resolutions"), "resolution outside [1, 4096]");
        res.push_back(static_cast<int>(m_i));
      }
    }
    const std::string expect = c.has("expect") ? as_string(*c.optional("expect"), c.child("expect")) : "exact";
    if (expect != "exact" && expect != "order2")
      schema_error(c.child("expect"), "expected 'exact' or 'order2'");
    if (expect == "order2" && res.size() < 2)
      schema_error(c.child("resolutions"), "order check needs two or more resolutions");
    const Region target = *tgt;
    return [=](Rng&) {
      std::vector<double> err;
      for (int m_i : res)
        err.push_back(substitution_check(m, g, h, f, src, target, m_i).relerr);
      Tally t{""};
      if (expect == "exact")
        for (double e : err)
          t.add_strict(e, 1e-14);
      else
        for (std::size_t i = 1; i < err.size(); ++i)
        {
          const double ratio = err[i - 1] / err[i];
          t.add({std::abs(ratio - 4.0), 0.5});
        }
      return std::make_pair(t.entry(), std::size_t{0});
    };
  }
  if (type == "convergence")
  {
    const Json& seq = c.require("sequence");
    const std::vector<ChartMap> maps = parse_map_list(seq, c.child("sequence"), n);
    if (maps.empty())
      schema_error(c.child("sequence"), "expected at least one map");
    const ChartMap limit = chart("limit");
    const MetricField g = metric("g"), h = metric("h");
    const std::optional<double> k2 = optional_double(c, "k2_bound");
    const auto pts = samples_or_default(c, n, limit, 1000);
    return [=](Rng&) {
      const ConvergenceReport rep = uniform_convergence_demo(maps, limit, g, h, pts, k2);
      Tally t{""};
      t.add({rep.limit_k2, rep.bound});
      CertificateEntry e = t.entry();
      e.samples = rep.samples;
      return std::make_pair(e, std::size_t{0});
    };
  }
  schema_error(c.child("type"), "unknown check type '" + type + "'");
}

inline std::function<void(ResultBundle&)> prepare_certify(ObjectReader& r, int n, std::uint64_t seed)
{
  const Json& checks = r.require("checks");
  if (!checks.is_array())
    schema_error(r.child("checks"), "expected an array of checks");
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<CheckRun> runs;
  std::set<std::string> names;
  for (std::size_t i = 0; i < checks.size(); ++i)
  {
    ObjectReader c(checks[i], r.child("checks") + "[" + std::to_string(i) + "]");
    const std::string name = as_string(c.require("name"), c.child("name"));
    const std::string type = as_string(c.require("type"), c.child("type"));
    if (name.empty() || name.find_first_of(",\"\n\r") != std::string::npos)
      schema_error(c.child("name"), "names must be non-empty and free of commas, quotes and newlines");
    if (!names.insert(name).second)
      schema_error(c.child("name"), "duplicate check name '" + name + "'");
    runs.push_back(prepare_check(c, type, n));
    c.finish();
    meta.emplace_back(name, type);
  }
  return [=](ResultBundle& out) {
    out.columns = {"name", "type", "pass", "worst_margin", "samples", "excluded"};
    Rng rng(seed);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < runs.size(); ++i)
    {
      auto [e, excluded] = runs[i](rng);
      e.name = meta[i].first;
      failed += e.pass ? 0 : 1;
      out.rows.push_back({Json(e.name), Json(meta[i].second), Json(e.pass), Json(e.worst_margin), Json(e.samples),
                          Json(excluded)});
      out.certificates.push_back(e);
    }
    out.summary["checks"] = runs.size();
    out.summary["failed"] = failed;
  };
}

}  // namespace detail

/// Runs command on a parsed configuration document. seed_override (the
/// --seed flag) takes precedence over the document's "seed".
inline ResultBundle run_command(const std::string& command, const Json& config,
                                std::optional<std::uint64_t> seed_override = std::nullopt)
{
  bool known = false;
  for (const char* c : kCommands)
    known = known || command == c;
  if (!known)
    throw ConfigError("unknown command '" + command + "'");

  ObjectReader r(config, "config");
  if (const Json* c = r.optional("command"))
    if (as_string(*c, r.child("command")) != command)
      schema_error(r.child("command"), "does not match the requested command '" + command + "'");
  const auto dim = as_int(r.require("dimension"), r.child("dimension"));
  if (dim < kMinDimension || dim > kMaxDimension)
    schema_error(r.child("dimension"), "outside [2, 8]");
  const int n = static_cast<int>(dim);
  std::uint64_t seed = 0;
  if (const Json* s = r.optional("seed"))
  {
    if (!s->is_number_unsigned())
      schema_error(r.child("seed"), "expected a non-negative integer");
    seed = s->get<std::uint64_t>();
  }
  if (seed_override)
    seed = *seed_override;
  std::optional<std::vector<std::string>> requested;
  if (const Json* c = r.optional("certificates"))
  {
    if (!c->is_array())
      schema_error(r.child("certificates"), "expected an array of names");
    requested.emplace();
    for (const auto& v : *c)
    {
      const std::string name = as_string(v, r.child("certificates"));
      for (const auto& prev : *requested)
        if (prev == name)
          schema_error(r.child("certificates"), "'" + name + "' listed twice");
      requested->push_back(name);
    }
  }
  const bool timing = r.has("report_timing") && as_bool(*r.optional("report_timing"), r.child("report_timing"));

  std::function<void(ResultBundle&)> body;
  try
  {
    if (command == "distortion")
      body = detail::prepare_distortion(r, n);
    else if (command == "meb")
      body = detail::prepare_meb(r, n, seed);
    else if (command == "tukia")
      body = detail::prepare_tukia(r, n);
    else if (command == "flow")
      body = detail::prepare_flow(r, n);
    else
      body = detail::prepare_certify(r, n, seed);
  }
  catch (const ConfigError&)
  {
    throw;
  }
  catch (const Error& e)
  {
    throw ConfigError(std::string("config: ") + e.what());
  }
  r.finish();

  ResultBundle out;
  out.command = command;
  out.seed = seed;
  out.config = config;
  const auto start = std::chrono::steady_clock::now();
  body(out);
  if (timing)
    out.timing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (requested)
  {
    std::vector<CertificateEntry> kept;
    for (const auto& name : *requested)
    {
      bool found = false;
      for (const auto& c : out.certificates)
        if (c.name == name)
        {
          kept.push_back(c);
          found = true;
        }
      if (!found)
        throw ConfigError("config.certificates: '" + name + "' is not produced by command '" + command + "'");
    }
    out.certificates = std::move(kept);
  }
  return out;
}

}  // namespace qcdist::io
