#pragma once

// Strict reader for run configurations and the catalog parsers built on it.
// Every object is read through ObjectReader, which rejects keys that were
// never asked for.

#include <limits>
#include <set>
#include <string>
#include <vector>

#include "qcdist/chart_map.hpp"
#include "qcdist/flow.hpp"
#include "qcdist/group_solver.hpp"
#include "qcdist/io/emit.hpp"
#include "qcdist/meb.hpp"
#include "qcdist/metric_field.hpp"
#include "qcdist/pullback.hpp"
#include "qcdist/scalar_field.hpp"

namespace qcdist::io {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what)
{
  throw ConfigError(path + ": " + what);
}

class ObjectReader
{
public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      schema_error(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(const std::string& key) const { return path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& require(const std::string& key)
  {
    seen_.insert(key);
    if (!j_.contains(key))
      schema_error(path_, "missing key '" + key + "'");
    return j_.at(key);
  }

  const Json* optional(const std::string& key)
  {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  /// Throws on any key that was not read.
  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        schema_error(path_, "unknown key '" + it.key() + "'");
  }

private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline double as_double(const Json& j, const std::string& path)
{
  if (!j.is_number())
    schema_error(path, "expected a number");
  return j.get<double>();
}

inline long long as_int(const Json& j, const std::string& path)
{
  if (!j.is_number_integer())
    schema_error(path, "expected an integer");
  return j.get<long long>();
}

inline bool as_bool(const Json& j, const std::string& path)
{
  if (!j.is_boolean())
    schema_error(path, "expected true or false");
  return j.get<bool>();
}

inline std::string as_string(const Json& j, const std::string& path)
{
  if (!j.is_string())
    schema_error(path, "expected a string");
  return j.get<std::string>();
}

inline Vector as_vector(const Json& j, const std::string& path, int n)
{
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    schema_error(path, "expected an array of " + std::to_string(n) + " numbers");
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v(i) = as_double(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  return v;
}

inline Matrix as_matrix(const Json& j, const std::string& path, int n)
{
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    schema_error(path, "expected " + std::to_string(n) + " rows");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    m.row(i) = as_vector(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]", n).transpose();
  return m;
}

inline SymMatrix as_symmetric(const Json& j, const std::string& path, int n)
{
  const Matrix m = as_matrix(j, path, n);
  if (!m.isApprox(m.transpose(), 1e-14) && !(m - m.transpose()).isZero(0.0))
    schema_error(path, "matrix is not symmetric");
  return SymMatrix(m);
}

inline SPDMatrix as_spd(const Json& j, const std::string& path, int n)
{
  try
  {
    return SPDMatrix(as_symmetric(j, path, n));
  }
  catch (const NumericalError& e)
  {
    schema_error(path, e.what());
  }
}

/// {"lower": [...], "upper": [...]} with null for an unbounded side.
inline Box as_box(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  auto bound = [&](const char* key, double open) {
    const Json& a = r.require(key);
    if (!a.is_array() || static_cast<int>(a.size()) != n)
      schema_error(r.child(key), "expected an array of " + std::to_string(n) + " numbers or nulls");
    Vector v(n);
    for (int i = 0; i < n; ++i)
    {
      const Json& e = a[static_cast<std::size_t>(i)];
      v(i) = e.is_null() ? open : as_double(e, r.child(key) + "[" + std::to_string(i) + "]");
    }
    return v;
  };
  const double inf = std::numeric_limits<double>::infinity();
  Box b{bound("lower", -inf), bound("upper", inf)};
  r.finish();
  for (int i = 0; i < n; ++i)
    if (!(b.lower(i) < b.upper(i)))
      schema_error(path, "empty box along axis " + std::to_string(i));
  return b;
}

/// Reads "kind" and an optional "params" object.
struct CatalogEntry
{
  std::string kind;
  Json params = Json::object();
};

inline CatalogEntry read_entry(ObjectReader& r)
{
  CatalogEntry e;
  e.kind = as_string(r.require("kind"), r.child("kind"));
  if (const Json* p = r.optional("params"))
    e.params = *p;
  return e;
}

template <class F>
auto catalog_guard(const std::string& path, F&& build) -> decltype(build())
{
  try
  {
    return build();
  }
  catch (const ConfigError&)
  {
    throw;
  }
  catch (const Error& e)
  {
    schema_error(path, e.what());
  }
}

inline MetricField parse_metric(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  const CatalogEntry e = read_entry(r);
  ObjectReader p(e.params, r.child("params"));
  const Json* dom = r.optional("domain");
  r.finish();
  std::optional<Box> box;
  if (dom)
    box = as_box(*dom, r.child("domain"), n);
  auto whole = [&] { return box ? *box : Box::whole(n); };
  return catalog_guard(path, [&]() -> MetricField {
    if (e.kind == "euclidean")
    {
      p.finish();
      return MetricField::euclidean(n, whole());
    }
    if (e.kind == "conformal_flat")
    {
      const double s = p.has("log_scale") ? as_double(*p.optional("log_scale"), p.child("log_scale")) : 0.0;
      const Vector grad =
          p.has("gradient") ? as_vector(*p.optional("gradient"), p.child("gradient"), n) : Vector(Vector::Zero(n));
      p.finish();
      return MetricField::conformal_flat(s, grad, whole());
    }
    if (e.kind == "hyperbolic_halfspace")
    {
      p.finish();
      return box ? MetricField::hyperbolic_halfspace(n, *box) : MetricField::hyperbolic_halfspace(n);
    }
    if (e.kind == "round_sphere_stereographic")
    {
      const double radius = p.has("radius") ? as_double(*p.optional("radius"), p.child("radius")) : 1.0;
      p.finish();
      return MetricField::round_sphere_stereographic(n, radius, whole());
    }
    if (e.kind == "constant_spd")
    {
      const SPDMatrix a = as_spd(p.require("matrix"), p.child("matrix"), n);
      p.finish();
      return MetricField::constant_spd(a, whole());
    }
    if (e.kind == "custom_polynomial")
    {
      const SymMatrix c = as_symmetric(p.require("constant"), p.child("constant"), n);
      const Json& lin = p.require("linear");
      if (!lin.is_array() || static_cast<int>(lin.size()) != n)
        schema_error(p.child("linear"), "expected one matrix per coordinate");
      std::vector<SymMatrix> ls;
      for (int k = 0; k < n; ++k)
        ls.push_back(as_symmetric(lin[static_cast<std::size_t>(k)], p.child("linear") + "[" + std::to_string(k) + "]", n));
      p.finish();
      if (!box || !box->finite())
        schema_error(path, "custom_polynomial needs a finite domain box");
      return MetricField::custom_polynomial(c, ls, *box);
    }
    schema_error(r.child("kind"), "unknown metric kind '" + e.kind + "'");
  });
}

inline ChartMap parse_map(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  const CatalogEntry e = read_entry(r);
  ObjectReader p(e.params, r.child("params"));
  const Json* src = r.optional("source");
  const Json* tgt = r.optional("target");
  r.finish();
  std::optional<Box> source;
  std::optional<Box> target;
  if (src)
    source = as_box(*src, r.child("source"), n);
  if (tgt)
    target = as_box(*tgt, r.child("target"), n);
  // A declared target must contain the image of the source samples.
  auto checked = [&](ChartMap m) {
    if (target)
      for (const Vector& x : halton_points(m.source(), 256))
      {
        Vector y;
        try
        {
          y = m(x);
        }
        catch (const DomainError&)
        {
          continue;
        }
        if (!target->contains(y, 1e-9))
          schema_error(r.child("target"), "does not contain the image of the source box");
      }
    return m;
  };
  auto no_target = [&] {
    if (target)
      schema_error(r.child("target"), "target box is derived for map kind '" + e.kind + "'");
  };
  return catalog_guard(path, [&]() -> ChartMap {
    if (e.kind == "identity")
    {
      p.finish();
      no_target();
      return ChartMap::identity(n, source ? *source : Box::whole(n));
    }
    if (e.kind == "linear")
    {
      const Matrix a = as_matrix(p.require("matrix"), p.child("matrix"), n);
      p.finish();
      if (target)
        return checked(ChartMap::linear(a, source ? *source : Box::whole(n), *target));
      return ChartMap::linear(a, source ? *source : Box::whole(n));
    }
    if (e.kind == "translation")
    {
      const Vector b = as_vector(p.require("offset"), p.child("offset"), n);
      p.finish();
      no_target();
      return ChartMap::translation(b, source ? *source : Box::whole(n));
    }
    if (e.kind == "mobius_ball")
    {
      const Vector a = as_vector(p.require("center"), p.child("center"), n);
      p.finish();
      const double s = 1.0 / std::sqrt(static_cast<double>(n));
      return checked(ChartMap::mobius_ball(a, source ? *source : Box::cube(n, -s, s),
                                           target ? *target : Box::cube(n, -1.0, 1.0)));
    }
    if (e.kind == "radial_stretch")
    {
      const double eps = as_double(p.require("exponent"), p.child("exponent"));
      p.finish();
      no_target();
      return ChartMap::radial_stretch(n, eps, source ? *source : Box::cube(n, -1.0, 1.0));
    }
    if (e.kind == "composition")
    {
      const Json& maps = p.require("maps");
      p.finish();
      if (!maps.is_array() || maps.empty())
        schema_error(p.child("maps"), "expected a non-empty array of maps");
      if (source || target)
        schema_error(path, "composition takes its boxes from its parts");
      ChartMap m = parse_map(maps[0], p.child("maps") + "[0]", n);
      for (std::size_t i = 1; i < maps.size(); ++i)
        m = ChartMap::composition(m, parse_map(maps[i], p.child("maps") + "[" + std::to_string(i) + "]", n));
      return m;
    }
    if (e.kind == "declared_inverse")
    {
      const ChartMap base = parse_map(p.require("map"), p.child("map"), n);
      p.finish();
      if (source || target)
        schema_error(path, "declared_inverse takes its boxes from the inverted map");
      return base.inverse();
    }
    schema_error(r.child("kind"), "unknown map kind '" + e.kind + "'");
  });
}

inline std::vector<Monomial> parse_terms(const Json& j, const std::string& path, int n)
{
  if (!j.is_array())
    schema_error(path, "expected an array of terms");
  std::vector<Monomial> out;
  for (std::size_t i = 0; i < j.size(); ++i)
  {
    const std::string tp = path + "[" + std::to_string(i) + "]";
    ObjectReader t(j[i], tp);
    Monomial m;
    m.coefficient = as_double(t.require("coefficient"), t.child("coefficient"));
    const Json& pw = t.require("powers");
    t.finish();
    if (!pw.is_array() || static_cast<int>(pw.size()) != n)
      schema_error(t.child("powers"), "expected one exponent per coordinate");
    for (std::size_t k = 0; k < pw.size(); ++k)
      m.powers.push_back(static_cast<int>(as_int(pw[k], t.child("powers"))));
    out.push_back(m);
  }
  return out;
}

inline ScalarField parse_scalar(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  const CatalogEntry e = read_entry(r);
  ObjectReader p(e.params, r.child("params"));
  r.finish();
  return catalog_guard(path, [&]() -> ScalarField {
    if (e.kind == "constant")
    {
      const double v = as_double(p.require("value"), p.child("value"));
      p.finish();
      return ScalarField::constant(n, v);
    }
    if (e.kind == "coordinate")
    {
      const auto i = as_int(p.require("index"), p.child("index"));
      p.finish();
      return ScalarField::coordinate(n, static_cast<int>(i));
    }
    if (e.kind == "polynomial")
    {
      auto terms = parse_terms(p.require("terms"), p.child("terms"), n);
      p.finish();
      return ScalarField::polynomial(n, terms);
    }
    if (e.kind == "gaussian")
    {
      const Vector c = as_vector(p.require("center"), p.child("center"), n);
      const double w = as_double(p.require("width"), p.child("width"));
      const double a = p.has("amplitude") ? as_double(*p.optional("amplitude"), p.child("amplitude")) : 1.0;
      p.finish();
      return ScalarField::gaussian(c, w, a);
    }
    schema_error(r.child("kind"), "unknown scalar field kind '" + e.kind + "'");
  });
}

inline VectorField parse_field(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  const CatalogEntry e = read_entry(r);
  ObjectReader p(e.params, r.child("params"));
  r.finish();
  auto vec_or_zero = [&](const char* key) {
    return p.has(key) ? as_vector(*p.optional(key), p.child(key), n) : Vector(Vector::Zero(n));
  };
  auto mat_or_zero = [&](const char* key) {
    return p.has(key) ? as_matrix(*p.optional(key), p.child(key), n) : Matrix(Matrix::Zero(n, n));
  };
  return catalog_guard(path, [&]() -> VectorField {
    if (e.kind == "linear")
    {
      const Matrix a = as_matrix(p.require("matrix"), p.child("matrix"), n);
      const Vector b = vec_or_zero("offset");
      p.finish();
      return VectorField::linear(a, b);
    }
    if (e.kind == "conformal_killing")
    {
      const Vector t = vec_or_zero("translation");
      const double s = p.has("scale") ? as_double(*p.optional("scale"), p.child("scale")) : 0.0;
      const Matrix w = mat_or_zero("rotation");
      const Vector c = vec_or_zero("special");
      p.finish();
      return VectorField::conformal_killing(t, s, w, c);
    }
    if (e.kind == "killing_rotation")
    {
      const Matrix w = as_matrix(p.require("matrix"), p.child("matrix"), n);
      const Vector c = vec_or_zero("center");
      p.finish();
      return VectorField::killing_rotation(w, c);
    }
    if (e.kind == "polynomial")
    {
      const Json& comps = p.require("components");
      p.finish();
      if (!comps.is_array() || static_cast<int>(comps.size()) != n)
        schema_error(p.child("components"), "expected one term list per coordinate");
      std::vector<ScalarField> fs;
      for (int k = 0; k < n; ++k)
        fs.push_back(ScalarField::polynomial(
            n, parse_terms(comps[static_cast<std::size_t>(k)], p.child("components") + "[" + std::to_string(k) + "]", n)));
      return VectorField::polynomial(fs);
    }
    schema_error(r.child("kind"), "unknown vector field kind '" + e.kind + "'");
  });
}

inline std::vector<ChartMap> parse_map_list(const Json& j, const std::string& path, int n)
{
  if (!j.is_array())
    schema_error(path, "expected an array of maps");
  std::vector<ChartMap> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_map(j[i], path + "[" + std::to_string(i) + "]", n));
  return out;
}

inline QCGroup parse_group(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  auto elements = parse_map_list(r.require("elements"), r.child("elements"), n);
  std::vector<ChartMap> gens;
  if (const Json* g = r.optional("generators"))
    gens = parse_map_list(*g, r.child("generators"), n);
  const double k = as_double(r.require("k_bound"), r.child("k_bound"));
  r.finish();
  return catalog_guard(path, [&] { return QCGroup(std::move(elements), k, std::move(gens)); });
}

/// {"box": {...}} or {"ball": {"center": [...], "radius": r}}.
inline Region parse_region(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  const Json* box = r.optional("box");
  const Json* ball = r.optional("ball");
  r.finish();
  if ((box == nullptr) == (ball == nullptr))
    schema_error(path, "expected exactly one of 'box' or 'ball'");
  if (box)
  {
    Box b = as_box(*box, r.child("box"), n);
    if (!b.finite())
      schema_error(r.child("box"), "integration box must be finite");
    return Region::of_box(b);
  }
  ObjectReader b(*ball, r.child("ball"));
  const Vector c = as_vector(b.require("center"), b.child("center"), n);
  const double rad = as_double(b.require("radius"), b.child("radius"));
  b.finish();
  if (!(rad > 0.0))
    schema_error(b.child("radius"), "radius must be positive");
  return Region::of_ball(c, rad);
}

/// {"box": {...}, "resolution": [m_1, ..., m_n]} -> cell-centered nodes.
inline std::vector<Vector> parse_grid(const Json& j, const std::string& path, int n)
{
  ObjectReader r(j, path);
  const Box box = as_box(r.require("box"), r.child("box"), n);
  const Json& res = r.require("resolution");
  r.finish();
  if (!box.finite())
    schema_error(r.child("box"), "grid box must be finite");
  if (!res.is_array() || static_cast<int>(res.size()) != n)
    schema_error(r.child("resolution"), "expected one count per axis");
  std::vector<int> m;
  for (std::size_t i = 0; i < res.size(); ++i)
  {
    const auto v = as_int(res[i], r.child("resolution"));
    if (v < 0 || v > 4096)
      schema_error(r.child("resolution"), "count outside [0, 4096]");
    m.push_back(static_cast<int>(v));
  }
  return grid_nodes(box, m);
}

/// {"box": {...}, "count": N} -> Halton points.
inline std::vector<Vector> parse_samples(const Json& j, const std::string& path, int n, std::size_t default_count)
{
  ObjectReader r(j, path);
  const Box box = as_box(r.require("box"), r.child("box"), n);
  std::size_t count = default_count;
  if (const Json* c = r.optional("count"))
  {
    const auto v = as_int(*c, r.child("count"));
    if (v < 1 || v > 1000000)
      schema_error(r.child("count"), "count outside [1, 1000000]");
    count = static_cast<std::size_t>(v);
  }
  r.finish();
  return halton_points(box, count);
}

inline SolverConfig parse_solver(const Json* j, const std::string& path)
{
  SolverConfig cfg;
  if (!j)
    return cfg;
  ObjectReader r(*j, path);
  if (const Json* v = r.optional("tol"))
    cfg.tol = as_double(*v, r.child("tol"));
  if (const Json* v = r.optional("max_iterations"))
    cfg.max_iterations = static_cast<int>(as_int(*v, r.child("max_iterations")));
  if (const Json* v = r.optional("window"))
    cfg.window = static_cast<int>(as_int(*v, r.child("window")));
  if (const Json* v = r.optional("warm_start_iterations"))
    cfg.warm_start_iterations = static_cast<int>(as_int(*v, r.child("warm_start_iterations")));
  r.finish();
  if (!(cfg.tol > 0.0) || cfg.max_iterations < 1 || cfg.window < 1 || cfg.warm_start_iterations < 0)
    schema_error(path, "solver settings out of range");
  return cfg;
}

}  // namespace qcdist::io
