#pragma once

// Command-line front end: thinshell verify | operator | convergence | catalog.
// Exit codes: 0 all checks pass, 1 check failures, 2 configuration or parse
// errors.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thinshell/catalog.hpp"
#include "thinshell/config.hpp"
#include "thinshell/driver.hpp"

namespace thinshell {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailures = 1;
inline constexpr int kExitConfig = 2;

struct RunFlags {
  std::string config_path;
  std::vector<std::string> surfaces, profiles, fields;
  std::vector<double> alphas;
  std::string points;
  std::optional<std::int64_t> seed;
  std::string format, out;
  bool dump_config = false;
  bool timing = false;
  bool no_oracle = false;
  std::vector<std::pair<std::string, double>> tolerances;
};

namespace detail {

// Pulls --tol.<check>=<value> (or --tol.<check> <value>) out of argv; CLI11
// cannot declare options whose names are open-ended.
inline std::vector<std::string> extract_tolerances(const std::vector<std::string>& args,
                                                   RunFlags& flags) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--tol.", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    std::string body = a.substr(6);
    std::string value;
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      value = body.substr(eq + 1);
      body = body.substr(0, eq);
    } else if (i + 1 < args.size()) {
      value = args[++i];
    } else {
      throw ConfigError("missing value for --tol." + body, "/tolerances/" + body);
    }
    flags.tolerances.emplace_back(body, parse_double(value, "/tolerances/" + body));
  }
  return rest;
}

inline Json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "");
  }
}

// Flags override the config file; the result is the document that runs.
inline Json compile_flags(const RunFlags& f, const std::string& command) {
  Json doc = f.config_path.empty() ? Json::object() : read_config_file(f.config_path);
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", "");
  if (!f.surfaces.empty()) {
    doc.erase("surface");
    Json s = Json::array();
    for (std::size_t i = 0; i < f.surfaces.size(); ++i)
      s.push_back(surface_from_flag(f.surfaces[i], "/surfaces/" + std::to_string(i)));
    doc["surfaces"] = s;
  }
  if (!f.fields.empty()) {
    Json a = Json::array();
    for (std::size_t i = 0; i < f.fields.size(); ++i)
      a.push_back(field_from_flag(f.fields[i], "/fields/" + std::to_string(i)));
    doc["fields"] = a;
  }
  if (command == "operator") {
    if (!f.alphas.empty()) doc["alphas"] = f.alphas;
  } else if (!f.profiles.empty() || !f.alphas.empty()) {
    Json p = Json::array();
    for (const auto& s : f.profiles) p.push_back(s);
    for (double a : f.alphas) p.push_back("alpha:" + format_number(a));
    doc["profiles"] = p;
  }
  if (command == "operator" && !f.profiles.empty()) {
    // Alpha profiles name the sweep values for the operator table.
    Json a = doc.contains("alphas") && !f.alphas.empty() ? doc["alphas"] : Json::array();
    for (std::size_t i = 0; i < f.profiles.size(); ++i)
      a.push_back(BoundaryProfile::parse(f.profiles[i]).alpha());
    doc["alphas"] = a;
  }
  if (!f.points.empty()) doc["samples"] = samples_from_flag(f.points, "/samples");
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.format.empty()) doc["output"]["format"] = f.format;
  if (!f.out.empty()) doc["output"]["path"] = f.out;
  if (f.no_oracle) doc["oracle"]["enabled"] = false;
  for (const auto& [k, v] : f.tolerances) doc["tolerances"][k] = v;
  return doc;
}

inline void add_run_options(CLI::App& app, RunFlags& f) {
  app.add_option("--config", f.config_path, "JSON run configuration");
  app.add_option("--surface", f.surfaces,
                 "sphere:R=1 | ellipsoid:a=1,b=1.3,c=2 | torus:R=2,r=0.7 | graph:<f> | "
                 "custom:<x>;<y>;<z> | random:<seed> (repeatable)");
  app.add_option("--profile", f.profiles, "slip | hodge | alpha:<value> (repeatable)");
  app.add_option("--alpha", f.alphas, "alpha value (repeatable)");
  app.add_option("--field", f.fields, "random:count=5,seed=1 | <V1>;<V2> (repeatable)");
  app.add_option("--points", f.points, "sobol:count=10,seed=1 | random:count=10,seed=1 | u1,u2;...");
  app.add_option("--seed", f.seed, "base seed for fields and samples");
  app.add_option("--format", f.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", f.out, "write the report to this path instead of stdout");
  app.add_flag("--dump-config", f.dump_config, "print the compiled configuration and exit");
  app.add_flag("--timing", f.timing, "include wall time in the report (not reproducible)");
  app.add_flag("--no-oracle", f.no_oracle, "skip the finite-difference oracle checks");
  app.footer("Tolerances: --tol.<check>=<value>, e.g. --tol.theorem=1e-8");
}

inline void describe_entry(std::ostream& os, const CatalogEntry& e) {
  os << e.name << "\n";
  os << "  parameters:";
  if (e.defaults.empty()) os << " none";
  for (const auto& [k, v] : e.defaults) os << " " << k << "=" << format_number(v);
  os << "\n  chart: " << e.chart << "\n  domain: " << e.domain
     << " (sampling keeps a 5% margin per side by default)\n  notes: " << e.notes << "\n";
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app{"Thin-shell vector Laplacian verification"};
  app.require_subcommand(1);
  RunFlags flags;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant and theorem checks");
  CLI::App* op = app.add_subcommand("operator", "tabulate the alpha-family operator");
  CLI::App* conv = app.add_subcommand("convergence", "observed orders of the finite-difference routes");
  CLI::App* cat = app.add_subcommand("catalog", "list built-in surfaces");
  for (CLI::App* sub : {verify, op, conv}) detail::add_run_options(*sub, flags);
  std::string describe;
  cat->add_option("--describe", describe, "show one surface in detail");

  try {
    std::vector<std::string> rest = detail::extract_tolerances(args, flags);
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (cat->parsed()) {
    if (describe.empty()) {
      for (const auto& e : catalog()) {
        out << e.name;
        for (const auto& [k, v] : e.defaults) out << " " << k << "=" << detail::format_number(v);
        out << "\n";
      }
      return kExitOk;
    }
    if (const CatalogEntry* e = find_catalog_entry(describe)) {
      detail::describe_entry(out, *e);
      return kExitOk;
    }
    std::vector<std::string> names;
    for (const auto& e : catalog()) names.push_back(e.name);
    const std::string s = suggest_name(describe, names);
    err << "error: unknown surface '" << describe << "'" << (s.empty() ? "" : "; did you mean '" + s + "'?")
        << "\n";
    return kExitConfig;
  }

  const std::string command = verify->parsed() ? "verify" : op->parsed() ? "operator" : "convergence";
  RunConfig cfg;
  try {
    cfg = load_config(detail::compile_flags(flags, command));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (flags.dump_config) {
    out << cfg.document.dump(2) << "\n";
    return kExitOk;
  }
  if (cfg.surfaces.empty()) {
    err << "error: config error at '/surfaces': no surface given (use --surface or a config file)\n";
    return kExitConfig;
  }

  const auto start = std::chrono::steady_clock::now();
  RunMetadata meta{command, cfg.seed, config_hash(cfg.document), std::nullopt};
  std::ostringstream report;
  int code = kExitOk;
  try {
    if (command == "verify") {
      const auto records = run_verify(cfg);
      const std::size_t failures = count_failures(records);
      if (flags.timing)
        meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (cfg.format == "csv") write_verify_csv(report, records);
      else write_verify_json(report, meta, records);
      err << "verify: " << records.size() << " checks, " << failures << " failed\n";
      code = failures == 0 ? kExitOk : kExitFailures;
    } else if (command == "operator") {
      const auto rows = run_operator(cfg);
      if (flags.timing)
        meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (cfg.format == "csv") write_operator_csv(report, rows);
      else write_operator_json(report, meta, rows);
    } else {
      const auto rows = run_convergence(cfg);
      if (flags.timing)
        meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (cfg.format == "csv") write_convergence_csv(report, rows);
      else write_convergence_json(report, meta, rows);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailures;
  }

  if (cfg.out_path.empty()) {
    out << report.str();
  } else {
    std::ofstream file(cfg.out_path);
    if (!file) {
      err << "error: cannot write '" << cfg.out_path << "'\n";
      return kExitConfig;
    }
    file << report.str();
  }
  return code;
}

}  // namespace thinshell
