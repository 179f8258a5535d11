#pragma once

// Result bundle shared by every command, its JSON / CSV writers and the
// schema validator used for parse-back checks.

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "qcdist/errors.hpp"
#include "qcdist/io/emit.hpp"

namespace qcdist::io {

struct CertificateEntry
{
  std::string name;
  bool pass = false;
  /// (rhs - lhs) / |rhs| at the worst sample; NaN when nothing was evaluated.
  double worst_margin = 0.0;
  std::size_t samples = 0;
};

struct ResultBundle
{
  std::string command;
  std::uint64_t seed = 0;
  Json config = Json::object();
  Json summary = Json::object();
  std::vector<CertificateEntry> certificates;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  std::optional<double> timing_seconds;

  bool all_pass() const
  {
    for (const auto& c : certificates)
      if (!c.pass)
        return false;
    return true;
  }

  Json to_json() const
  {
    Json j = Json::object();
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    j["summary"] = summary;
    Json certs = Json::array();
    for (const auto& c : certificates)
    {
      Json e = Json::object();
      e["name"] = c.name;
      e["pass"] = c.pass;
      e["worst_margin"] = c.worst_margin;
      e["samples"] = c.samples;
      certs.push_back(e);
    }
    j["certificates"] = certs;
    j["columns"] = columns;
    Json recs = Json::array();
    for (const auto& row : rows)
    {
      Json r = Json::object();
      for (std::size_t k = 0; k < columns.size(); ++k)
        r[columns[k]] = row[k];
      recs.push_back(r);
    }
    j["records"] = recs;
    if (timing_seconds)
      j["timing_seconds"] = *timing_seconds;
    return j;
  }

  void write_json(std::ostream& os) const
  {
    emit_json(to_json(), os);
    os << "\n";
  }

  /// Header row of column names, then one line per record.
  void write_csv(std::ostream& os) const
  {
    for (std::size_t k = 0; k < columns.size(); ++k)
      os << (k ? "," : "") << columns[k];
    os << "\n";
    for (const auto& row : rows)
    {
      for (std::size_t k = 0; k < row.size(); ++k)
        os << (k ? "," : "") << csv_cell(row[k]);
      os << "\n";
    }
  }

  void write(std::ostream& os, const std::string& format) const
  {
    if (format == "csv")
      write_csv(os);
    else
      write_json(os);
  }
};

/// Throws ConfigError unless j has the shape written by ResultBundle::to_json.
inline void validate_result(const Json& j)
{
  auto fail = [](const std::string& what) { throw ConfigError("result: " + what); };
  if (!j.is_object())
    fail("expected an object");
  static const std::set<std::string> required = {"command", "seed", "config", "summary",
                                                 "certificates", "columns", "records"};
  for (const auto& k : required)
    if (!j.contains(k))
      fail("missing key '" + k + "'");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!required.count(it.key()) && it.key() != "timing_seconds")
      fail("unknown key '" + it.key() + "'");
  static const std::set<std::string> commands = {"distortion", "meb", "tukia", "flow", "certify"};
  if (!j["command"].is_string() || !commands.count(j["command"].get<std::string>()))
    fail("bad command");
  if (!j["seed"].is_number_unsigned())
    fail("seed must be a non-negative integer");
  if (!j["config"].is_object() || !j["summary"].is_object())
    fail("config and summary must be objects");
  if (!j["certificates"].is_array())
    fail("certificates must be an array");
  std::set<std::string> names;
  for (const auto& c : j["certificates"])
  {
    if (!c.is_object() || c.size() != 4 || !c.contains("name") || !c["name"].is_string() || !c.contains("pass") ||
        !c["pass"].is_boolean() || !c.contains("worst_margin") ||
        !(c["worst_margin"].is_number() || c["worst_margin"].is_null()) || !c.contains("samples") ||
        !c["samples"].is_number_unsigned())
      fail("malformed certificate entry");
    if (!names.insert(c["name"].get<std::string>()).second)
      fail("certificate '" + c["name"].get<std::string>() + "' listed twice");
  }
  if (!j["columns"].is_array())
    fail("columns must be an array");
  std::vector<std::string> cols;
  for (const auto& c : j["columns"])
  {
    if (!c.is_string())
      fail("column names must be strings");
    cols.push_back(c.get<std::string>());
  }
  if (!j["records"].is_array())
    fail("records must be an array");
  for (const auto& r : j["records"])
  {
    if (!r.is_object() || r.size() != cols.size())
      fail("record does not match columns");
    std::size_t k = 0;
    for (auto it = r.begin(); it != r.end(); ++it, ++k)
      if (it.key() != cols[k] || it.value().is_structured())
        fail("record does not match columns");
  }
  if (j.contains("timing_seconds") && !j["timing_seconds"].is_number())
    fail("timing_seconds must be a number");
}

}  // namespace qcdist::io
