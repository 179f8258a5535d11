#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcdist/io/run.hpp"

namespace {

using namespace qcdist;
using namespace qcdist::io;

void print_summary(const ResultBundle& r, std::ostream& os)
{
  for (const auto& c : r.certificates)
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " worst_margin=" << format_double(c.worst_margin)
       << " samples=" << c.samples << "\n";
}

int run(const std::string& command, const std::string& config_path, const std::string& out_path,
        const std::string& format, std::optional<std::uint64_t> seed)
{
  Json config;
  {
    std::ifstream in(config_path);
    if (!in)
    {
      std::cerr << "qcdist: cannot read " << config_path << "\n";
      return kExitSchema;
    }
    try
    {
      config = Json::parse(in);
    }
    catch (const Json::parse_error& e)
    {
      std::cerr << "qcdist: " << config_path << ": " << e.what() << "\n";
      return kExitSchema;
    }
  }

  ResultBundle result;
  try
  {
    result = run_command(command, config, seed);
  }
  catch (const NumericalError& e)
  {
    std::cerr << "qcdist: numerical fault: " << e.what() << "\n";
    return kExitNumerical;
  }
  catch (const Error& e)
  {
    std::cerr << "qcdist: " << e.what() << "\n";
    return kExitSchema;
  }

  std::ostringstream buf;
  result.write(buf, format);
  if (out_path.empty())
    std::cout << buf.str();
  else
  {
    std::ofstream out(out_path, std::ios::binary);
    out << buf.str();
    if (!out)
    {
      std::cerr << "qcdist: cannot write " << out_path << "\n";
      return kExitSchema;
    }
  }
  print_summary(result, std::cerr);
  return result.all_pass() ? kExitOk : kExitCertificate;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Riemannian quasiconformal distortion toolkit"};
  app.name("qcdist");
  std::string command;
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  app.add_option("command", command, "distortion | meb | tukia | flow | certify")
      ->required()
      ->check(CLI::IsMember({"distortion", "meb", "tukia", "flow", "certify"}));
  app.add_option("--config", config_path, "configuration document (JSON)")->required();
  app.add_option("--out", out_path, "output file (default: standard output)");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized sweeps (overrides the config)");
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::Success& e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e)
  {
    app.exit(e);
    return kExitSchema;
  }
  std::optional<std::uint64_t> seed_override;
  if (seed_opt->count() > 0)
    seed_override = seed;
  return run(command, config_path, out_path, format, seed_override);
}
