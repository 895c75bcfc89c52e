#pragma once

// Run configuration. A run is described by one JSON document; command-line
// shorthands are compiled into that document before anything else happens,
// so `--dump-config` always shows exactly what will run.
//
// {
//   "surfaces":   [{"name": "sphere", "params": {"R": 1}}, ...],
//   "fields":     [{"random": {"count": 5, "seed": 1}}, {"components": ["u2", "-u1"]}],
//   "profiles":   ["slip", "hodge", "alpha:0.5"],
//   "alphas":     [0, 0.1, ...],             // operator sweeps
//   "samples":    {"sobol": {"count": 10, "seed": 1}} | {"random": {...}} | {"points": [[...]]},
//   "margin":     0.05,
//   "seed":       1,
//   "tolerances": {"theorem": 1e-7, ...},
//   "oracle":     {"enabled": true, "step": 0},
//   "output":     {"format": "json", "path": null}
// }
//
// A single "surface" object is accepted in place of "surfaces".

#include <algorithm>
#include <boost/random/sobol.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "thinshell/catalog.hpp"
#include "thinshell/errors.hpp"
#include "thinshell/fields.hpp"
#include "thinshell/shell.hpp"

namespace thinshell {

using Json = nlohmann::json;

inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"gauss", 1e-8},
      {"christoffel", 1e-9},
      {"shape_radial", 1e-6},
      {"metric_expansion", 2.8},  // minimum observed order
      {"weitzenboeck", 1e-7},
      {"extrinsic_coupling", 1e-9},
      {"theorem", 1e-7},
      {"decomposition", 1e-7},
      {"f_rad", 1e-9},
      {"trace_consistency", 1e-6},
      {"normal_deformation", 1e-10},
      {"radial_constancy", 1e-10},
      {"alpha_quadratic", 1e-10},
      {"oracle", 1e-4},
      {"oracle_order", 0.2},  // allowed distance of the observed order from 2
  };
  return t;
}

namespace detail {

inline double parse_double(const std::string& text, const std::string& pointer) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ConfigError("'" + text + "' is not a number", pointer);
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// "k=v,k=v" into a JSON object of numbers.
inline Json key_values(const std::string& s, const std::string& pointer) {
  Json obj = Json::object();
  if (s.empty()) return obj;
  for (const auto& kv : split(s, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("expected key=value, got '" + kv + "'", pointer);
    const std::string key = kv.substr(0, eq);
    const double v = parse_double(kv.substr(eq + 1), pointer + "/" + key);
    if (v == std::trunc(v) && std::abs(v) < 9e15) obj[key] = static_cast<std::int64_t>(v);
    else obj[key] = v;
  }
  return obj;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace detail

inline const std::vector<std::string>& surface_kinds() {
  static const std::vector<std::string> k = {"sphere", "ellipsoid", "torus", "graph",
                                             "custom", "random"};
  return k;
}

inline std::string suggest_name(const std::string& name, const std::vector<std::string>& options) {
  std::string best;
  std::size_t dist = 3;
  for (const auto& o : options) {
    const std::size_t d = detail::edit_distance(name, o);
    if (d < dist) {
      dist = d;
      best = o;
    }
  }
  return best;
}

// --surface shorthand:
//   sphere | sphere:R=1 | ellipsoid:a=1,b=1.3,c=2 | torus:R=2,r=0.7
//   graph:<height expr> | custom:<x>;<y>;<z> | random:<seed>
inline Json surface_from_flag(const std::string& flag, const std::string& pointer) {
  const auto colon = flag.find(':');
  const std::string name = flag.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : flag.substr(colon + 1);
  Json s;
  s["name"] = name;
  if (name == "graph") {
    if (rest.empty()) throw ConfigError("graph needs a height expression", pointer);
    s["height"] = rest;
  } else if (name == "custom") {
    if (rest.empty()) throw ConfigError("custom needs ';'-separated components", pointer);
    s["components"] = detail::split(rest, ';');
  } else if (name == "random") {
    s["seed"] = rest.empty() ? 1 : static_cast<std::int64_t>(detail::parse_double(rest, pointer + "/seed"));
  } else {
    s["params"] = detail::key_values(rest, pointer + "/params");
  }
  return s;
}

// --field shorthand: random:count=5,seed=3 | <e1>;<e2>
inline Json field_from_flag(const std::string& flag, const std::string& pointer) {
  Json f;
  if (flag.rfind("random", 0) == 0) {
    const auto colon = flag.find(':');
    Json r = detail::key_values(colon == std::string::npos ? "" : flag.substr(colon + 1), pointer);
    f["random"] = r;
  } else {
    f["components"] = detail::split(flag, ';');
  }
  return f;
}

// --points shorthand: sobol:count=10,seed=1 | random:count=10,seed=1 | 0.5,1;0.7,2
inline Json samples_from_flag(const std::string& flag, const std::string& pointer) {
  Json s;
  for (const char* kind : {"sobol", "random"}) {
    const std::string k = kind;
    if (flag.rfind(k, 0) == 0) {
      const auto colon = flag.find(':');
      s[k] = detail::key_values(colon == std::string::npos ? "" : flag.substr(colon + 1), pointer);
      return s;
    }
  }
  Json pts = Json::array();
  for (const auto& p : detail::split(flag, ';')) {
    Json pt = Json::array();
    for (const auto& c : detail::split(p, ',')) pt.push_back(detail::parse_double(c, pointer));
    pts.push_back(pt);
  }
  s["points"] = pts;
  return s;
}

// Fills every default so the document is complete and canonical.
inline Json normalize_config(Json doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", "");
  if (doc.contains("surface")) {
    if (doc.contains("surfaces"))
      throw ConfigError("give either 'surface' or 'surfaces', not both", "/surface");
    doc["surfaces"] = Json::array({doc["surface"]});
    doc.erase("surface");
  }
  if (!doc.contains("surfaces")) doc["surfaces"] = Json::array();
  if (!doc.contains("seed")) doc["seed"] = 1;
  if (!doc["seed"].is_number_integer()) throw ConfigError("seed must be an integer", "/seed");
  const auto seed = doc["seed"].get<std::int64_t>();
  if (!doc.contains("fields"))
    doc["fields"] = Json::array({Json{{"random", Json{{"count", 5}, {"seed", seed}}}}});
  if (!doc.contains("profiles")) doc["profiles"] = Json::array({"slip", "hodge", "alpha:0.5"});
  if (!doc.contains("alphas")) {
    Json a = Json::array();
    for (int k = 0; k <= 10; ++k) a.push_back(k / 10.0);
    doc["alphas"] = a;
  }
  if (!doc.contains("samples"))
    doc["samples"] = Json{{"sobol", Json{{"count", 10}, {"seed", seed}}}};
  for (const char* kind : {"sobol", "random"}) {
    if (doc["samples"].contains(kind)) {
      Json& s = doc["samples"][kind];
      if (!s.contains("count")) s["count"] = 10;
      if (!s.contains("seed")) s["seed"] = seed;
    }
  }
  for (auto& f : doc["fields"])
    if (f.is_object() && f.contains("random")) {
      if (!f["random"].contains("count")) f["random"]["count"] = 5;
      if (!f["random"].contains("seed")) f["random"]["seed"] = seed;
    }
  if (!doc.contains("margin")) doc["margin"] = 0.05;
  Json tol = Json::object();
  for (const auto& [k, v] : default_tolerances()) tol[k] = v;
  if (doc.contains("tolerances")) {
    if (!doc["tolerances"].is_object())
      throw ConfigError("tolerances must be an object", "/tolerances");
    for (const auto& [k, v] : doc["tolerances"].items()) {
      if (!tol.contains(k)) {
        const std::string s = suggest_name(k, [] {
          std::vector<std::string> names;
          for (const auto& [n, t] : default_tolerances()) names.push_back(n);
          return names;
        }());
        throw ConfigError("unknown check '" + k + "'" + (s.empty() ? "" : ", did you mean '" + s + "'?"),
                          "/tolerances/" + k);
      }
      if (!v.is_number()) throw ConfigError("tolerance must be a number", "/tolerances/" + k);
      tol[k] = v;
    }
  }
  doc["tolerances"] = tol;
  if (!doc.contains("oracle")) doc["oracle"] = Json::object();
  if (!doc["oracle"].contains("enabled")) doc["oracle"]["enabled"] = true;
  if (!doc["oracle"].contains("step")) doc["oracle"]["step"] = 0.0;
  if (!doc.contains("output")) doc["output"] = Json::object();
  if (!doc["output"].contains("format")) doc["output"]["format"] = "json";
  if (!doc["output"].contains("path")) doc["output"]["path"] = nullptr;
  return doc;
}

struct SurfaceCase {
  std::string label;
  Chart chart;
};

struct RunConfig {
  Json document;  // normalized
  std::vector<SurfaceCase> surfaces;
  std::vector<Json> field_specs;
  std::vector<BoundaryProfile> profiles;
  std::vector<double> alphas;
  double margin = 0.05;
  std::uint64_t seed = 1;
  std::map<std::string, double> tolerances;
  bool oracle = true;
  double oracle_step = 0.0;
  std::string format = "json";
  std::string out_path;

  double tol(const std::string& check) const { return tolerances.at(check); }

  // Fields for an n-dimensional chart, in config order.
  std::vector<TangentField> fields(int n) const {
    std::vector<TangentField> out;
    for (std::size_t k = 0; k < field_specs.size(); ++k) {
      const Json& f = field_specs[k];
      const std::string ptr = "/fields/" + std::to_string(k);
      if (f.contains("random")) {
        const auto count = f["random"]["count"].get<int>();
        const auto seed = f["random"]["seed"].get<std::uint64_t>();
        for (int i = 0; i < count; ++i)
          out.push_back(random_field(n, seed * 1000003u + static_cast<std::uint64_t>(i)));
      } else {
        try {
          out.emplace_back(f["components"].get<std::vector<std::string>>(), n);
        } catch (const Error& e) {
          throw ConfigError(e.what(), ptr + "/components");
        }
      }
    }
    return out;
  }
};

namespace detail {

inline std::vector<Interval> parse_domain(const Json& d, const std::string& ptr) {
  std::vector<Interval> out;
  if (!d.is_array()) throw ConfigError("domain must be an array of [lo, hi] pairs", ptr);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Json& iv = d[i];
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number() ||
        !(iv[0].get<double>() < iv[1].get<double>()))
      throw ConfigError("interval must be [lo, hi] with lo < hi", ptr + "/" + std::to_string(i));
    out.push_back({iv[0].get<double>(), iv[1].get<double>()});
  }
  return out;
}

inline std::string format_params(const Json& params) {
  std::string s;
  for (const auto& [k, v] : params.items()) {
    if (!s.empty()) s += ",";
    s += k + "=" + format_number(v.get<double>());
  }
  return s;
}

inline SurfaceCase build_surface(const Json& s, const std::string& ptr) {
  if (!s.is_object() || !s.contains("name") || !s["name"].is_string())
    throw ConfigError("surface needs a 'name'", ptr);
  const std::string name = s["name"].get<std::string>();
  const auto& kinds = surface_kinds();
  if (std::find(kinds.begin(), kinds.end(), name) == kinds.end()) {
    const std::string sug = suggest_name(name, kinds);
    throw ConfigError("unknown surface '" + name + "'" +
                          (sug.empty() ? "" : ", did you mean '" + sug + "'?"),
                      ptr + "/name");
  }
  std::map<std::string, double> params;
  if (s.contains("params")) {
    if (!s["params"].is_object()) throw ConfigError("params must be an object", ptr + "/params");
    for (const auto& [k, v] : s["params"].items()) {
      if (!v.is_number()) throw ConfigError("parameter must be a number", ptr + "/params/" + k);
      params[k] = v.get<double>();
    }
  }
  std::string label = s.contains("label") ? s["label"].get<std::string>() : "";
  try {
    if (name == "graph") {
      if (!s.contains("height")) throw ConfigError("graph needs 'height'", ptr + "/height");
      const std::string h = s["height"].get<std::string>();
      Chart c = s.contains("domain") ? make_graph(h, parse_domain(s["domain"], ptr + "/domain"))
                                     : make_graph(h);
      return {label.empty() ? "graph:" + h : label, c};
    }
    if (name == "custom") {
      if (!s.contains("components")) throw ConfigError("custom needs 'components'", ptr + "/components");
      const auto comps = s["components"].get<std::vector<std::string>>();
      std::vector<Interval> dom;
      if (s.contains("domain")) {
        dom = parse_domain(s["domain"], ptr + "/domain");
      } else {
        dom.assign(comps.empty() ? 0 : comps.size() - 1, Interval{-1.0, 1.0});
      }
      std::string def;
      for (const auto& c : comps) def += (def.empty() ? "" : ";") + c;
      return {label.empty() ? "custom:" + def : label, make_custom(comps, dom, params)};
    }
    if (name == "random") {
      const auto seed = s.contains("seed") ? s["seed"].get<std::uint64_t>() : 1u;
      return {label.empty() ? "random:" + std::to_string(seed) : label, random_custom_chart(seed)};
    }
    Chart c = make_catalog_chart(name, params);
    Json full = Json::object();
    for (const auto& [k, v] : c.parameters()) full[k] = v;
    return {label.empty() ? name + ":" + format_params(full) : label, c};
  } catch (const ConfigError& e) {
    // Re-anchor catalog pointers at this surface.
    const std::string p = e.pointer().rfind("/surface", 0) == 0 ? ptr + e.pointer().substr(8) : e.pointer();
    throw ConfigError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2), p);
  } catch (const Error& e) {
    const std::string where = name == "graph" ? "/height" : name == "custom" ? "/components" : "";
    throw ConfigError(e.what(), ptr + where);
  }
}

}  // namespace detail

inline RunConfig load_config(const Json& raw) {
  RunConfig cfg;
  cfg.document = normalize_config(raw);
  const Json& d = cfg.document;
  cfg.seed = d["seed"].get<std::uint64_t>();
  if (!d["margin"].is_number() || d["margin"].get<double>() < 0.0 || d["margin"].get<double>() >= 0.5)
    throw ConfigError("margin must be in [0, 0.5)", "/margin");
  cfg.margin = d["margin"].get<double>();
  for (std::size_t i = 0; i < d["surfaces"].size(); ++i)
    cfg.surfaces.push_back(detail::build_surface(d["surfaces"][i], "/surfaces/" + std::to_string(i)));
  for (std::size_t i = 0; i < d["fields"].size(); ++i) {
    const Json& f = d["fields"][i];
    const std::string ptr = "/fields/" + std::to_string(i);
    if (!f.is_object() || (!f.contains("random") && !f.contains("components")))
      throw ConfigError("field needs 'random' or 'components'", ptr);
    if (f.contains("components")) {
      if (!f["components"].is_array()) throw ConfigError("components must be an array", ptr + "/components");
      // Parse now so bad expressions are reported before any work starts.
      try {
        TangentField(f["components"].get<std::vector<std::string>>(),
                     static_cast<int>(f["components"].size()));
      } catch (const Error& e) {
        throw ConfigError(e.what(), ptr + "/components");
      }
    } else if (!f["random"]["count"].is_number_integer() || f["random"]["count"].get<int>() < 1) {
      throw ConfigError("count must be a positive integer", ptr + "/random/count");
    }
    cfg.field_specs.push_back(f);
  }
  for (std::size_t i = 0; i < d["profiles"].size(); ++i) {
    const std::string ptr = "/profiles/" + std::to_string(i);
    if (!d["profiles"][i].is_string()) throw ConfigError("profile must be a string", ptr);
    try {
      cfg.profiles.push_back(BoundaryProfile::parse(d["profiles"][i].get<std::string>()));
    } catch (const Error& e) {
      throw ConfigError(e.what(), ptr);
    }
  }
  for (std::size_t i = 0; i < d["alphas"].size(); ++i) {
    if (!d["alphas"][i].is_number()) throw ConfigError("alpha must be a number", "/alphas/" + std::to_string(i));
    cfg.alphas.push_back(d["alphas"][i].get<double>());
  }
  for (const auto& [k, v] : d["tolerances"].items()) cfg.tolerances[k] = v.get<double>();
  cfg.oracle = d["oracle"]["enabled"].get<bool>();
  cfg.oracle_step = d["oracle"]["step"].get<double>();
  cfg.format = d["output"]["format"].get<std::string>();
  if (cfg.format != "json" && cfg.format != "csv")
    throw ConfigError("format must be 'json' or 'csv'", "/output/format");
  if (!d["output"]["path"].is_null()) cfg.out_path = d["output"]["path"].get<std::string>();
  return cfg;
}

// Sample points for one chart: Sobol (Cranley-Patterson shifted by the seed),
// uniform random, or explicit points, all inside the chart box shrunk by the
// margin.
inline std::vector<std::vector<double>> sample_points(const RunConfig& cfg, const Chart& chart,
                                                      const std::string& pointer = "/samples") {
  const Json& s = cfg.document["samples"];
  const auto box = chart.interior(cfg.margin);
  const int n = chart.dim();
  std::vector<std::vector<double>> pts;
  if (s.contains("points")) {
    for (std::size_t k = 0; k < s["points"].size(); ++k) {
      const std::string ptr = pointer + "/points/" + std::to_string(k);
      const auto p = s["points"][k].get<std::vector<double>>();
      if (static_cast<int>(p.size()) != n)
        throw ConfigError("point has " + std::to_string(p.size()) + " coordinates, chart needs " +
                              std::to_string(n), ptr);
      for (int i = 0; i < n; ++i) {
        const auto& iv = box[static_cast<std::size_t>(i)];
        if (p[static_cast<std::size_t>(i)] < iv.lo || p[static_cast<std::size_t>(i)] > iv.hi)
          throw ConfigError("point lies outside the chart domain after the margin", ptr);
      }
      pts.push_back(p);
    }
    return pts;
  }
  const bool sobol = s.contains("sobol");
  const Json& spec = sobol ? s["sobol"] : s["random"];
  if (!spec.is_object()) throw ConfigError("samples need 'sobol', 'random' or 'points'", pointer);
  const int count = spec["count"].get<int>();
  if (count < 1) throw ConfigError("count must be positive", pointer + (sobol ? "/sobol" : "/random") + "/count");
  std::mt19937_64 rng(spec["seed"].get<std::uint64_t>());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (sobol) {
    boost::random::sobol qrng(static_cast<std::size_t>(n));
    std::vector<double> shift(static_cast<std::size_t>(n));
    for (auto& x : shift) x = unit(rng);
    const double scale = 1.0 / (static_cast<double>(qrng.max()) + 1.0);
    for (int k = 0; k < count; ++k) {
      std::vector<double> p;
      for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(qrng()) * scale + shift[static_cast<std::size_t>(i)];
        x -= std::floor(x);
        const auto& iv = box[static_cast<std::size_t>(i)];
        p.push_back(iv.lo + x * (iv.hi - iv.lo));
      }
      pts.push_back(p);
    }
  } else {
    for (int k = 0; k < count; ++k) {
      std::vector<double> p;
      for (const auto& iv : box) p.push_back(iv.lo + unit(rng) * (iv.hi - iv.lo));
      pts.push_back(p);
    }
  }
  return pts;
}

// FNV-1a over the canonical dump.
inline std::string config_hash(const Json& normalized) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : normalized.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace thinshell
