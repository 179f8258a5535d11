#pragma once

// Byte-stable JSON and CSV writers: doubles always carry 17 significant
// digits, object keys keep insertion order, non-finite values become null
// (JSON) or inf / -inf / nan (CSV).

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

namespace qcdist::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit_json(const Json& j, std::ostream& os, int indent = 0)
{
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type())
  {
    case Json::value_t::object:
    {
      if (j.empty())
      {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it)
      {
        if (!first)
          os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        emit_json(it.value(), os, indent + 2);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array:
    {
      if (j.empty())
      {
        os << "[]";
        return;
      }
      bool scalar = true;
      for (const auto& e : j)
        scalar = scalar && !e.is_structured();
      if (scalar)
      {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i)
        {
          if (i)
            os << ", ";
          emit_json(j[i], os, indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i)
      {
        if (i)
          os << ",\n";
        os << pad;
        emit_json(j[i], os, indent + 2);
      }
      os << "\n" << close << "]";
      return;
    }
    case Json::value_t::number_float:
    {
      const double v = j.get<double>();
      if (std::isfinite(v))
        os << format_double(v);
      else
        os << "null";
      return;
    }
    default:
      os << j.dump();
  }
}

inline std::string csv_cell(const Json& v)
{
  switch (v.type())
  {
    case Json::value_t::number_float: return format_double(v.get<double>());
    case Json::value_t::null: return "";
    case Json::value_t::string: return v.get<std::string>();
    default: return v.dump();
  }
}

}  // namespace qcdist::io
