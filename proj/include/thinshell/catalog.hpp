#pragma once

// Built-in surfaces. Every catalog chart is an ordinary expression chart, so
// catalog and user-defined surfaces share one evaluation path.

#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "thinshell/errors.hpp"
#include "thinshell/expr.hpp"
#include "thinshell/geometry.hpp"

namespace thinshell {

struct CatalogEntry {
  std::string name;
  std::map<std::string, double> defaults;
  std::string chart;   // meaning of the chart variables
  std::string domain;  // chart domain before margins
  std::string notes;
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"sphere", {{"R", 1.0}},
       "u1 = polar angle theta, u2 = azimuth phi; X = R(sin u1 cos u2, sin u1 sin u2, cos u1)",
       "u1 in [0, pi], u2 in [0, 2 pi]",
       "normal points outward, so S = -Id/R"},
      {"ellipsoid", {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}},
       "u1 = polar angle, u2 = azimuth; X = (a sin u1 cos u2, b sin u1 sin u2, c cos u1)",
       "u1 in [0, pi], u2 in [0, 2 pi]",
       "normal points outward"},
      {"torus", {{"R", 2.0}, {"r", 1.0}},
       "u1 = tube angle theta, u2 = ring angle phi; "
       "X = ((R + r cos u1) cos u2, (R + r cos u1) sin u2, r sin u1)",
       "u1 in [0, 2 pi], u2 in [0, 2 pi]",
       "normal points toward the tube centre line"},
      {"graph", {},
       "u1, u2 Cartesian; X = (u1, u2, f(u1, u2)) with f given as an expression",
       "u1 in [-1, 1], u2 in [-1, 1] unless overridden",
       "normal points to +z over a flat graph"},
      {"custom", {},
       "n+1 component expressions in u1..un (1 <= n <= 3)",
       "given explicitly, one interval per chart variable",
       "orientation follows the variable order"},
  };
  return entries;
}

inline const CatalogEntry* find_catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return &e;
  return nullptr;
}

inline Chart make_sphere(double radius = 1.0) {
  return Chart("sphere",
               {"R*sin(u1)*cos(u2)", "R*sin(u1)*sin(u2)", "R*cos(u1)"},
               {{0.0, std::numbers::pi}, {0.0, 2.0 * std::numbers::pi}},
               {{"R", radius}});
}

inline Chart make_ellipsoid(double a, double b, double c) {
  return Chart("ellipsoid",
               {"a*sin(u1)*cos(u2)", "b*sin(u1)*sin(u2)", "c*cos(u1)"},
               {{0.0, std::numbers::pi}, {0.0, 2.0 * std::numbers::pi}},
               {{"a", a}, {"b", b}, {"c", c}});
}

inline Chart make_torus(double major, double minor) {
  return Chart("torus",
               {"(R + r*cos(u1))*cos(u2)", "(R + r*cos(u1))*sin(u2)", "r*sin(u1)"},
               {{0.0, 2.0 * std::numbers::pi}, {0.0, 2.0 * std::numbers::pi}},
               {{"R", major}, {"r", minor}});
}

inline Chart make_graph(const std::string& height,
                        std::vector<Interval> domain = {{-1.0, 1.0}, {-1.0, 1.0}}) {
  return Chart("graph", {"u1", "u2", height}, std::move(domain));
}

inline Chart make_custom(std::vector<std::string> components,
                         std::vector<Interval> domain,
                         std::map<std::string, double> parameters = {}) {
  return Chart("custom", std::move(components), std::move(domain),
               std::move(parameters));
}

// A seeded, generically non-umbilic closed-ish surface: a radially perturbed
// ellipsoid rho(u) * (a sin u1 cos u2, b sin u1 sin u2, c cos u1).
inline Chart random_custom_chart(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> axis(0.8, 1.6);
  std::uniform_real_distribution<double> amp(-0.05, 0.05);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> freq(0, 2);
  const double a = axis(rng), b = axis(rng), c = axis(rng);
  std::string rho = "(1";
  for (int k = 0; k < 3; ++k) {
    int p = freq(rng), q = freq(rng);
    if (p == 0 && q == 0) p = 1;
    rho += " + " + detail::format_number(amp(rng)) + "*sin(" + std::to_string(p) +
           "*u1 + " + std::to_string(q) + "*u2 + " +
           detail::format_number(phase(rng)) + ")";
  }
  rho += ")";
  return Chart("custom",
               {rho + "*a*sin(u1)*cos(u2)", rho + "*b*sin(u1)*sin(u2)",
                rho + "*c*cos(u1)"},
               {{0.0, std::numbers::pi}, {0.0, 2.0 * std::numbers::pi}},
               {{"a", a}, {"b", b}, {"c", c}});
}

// Catalog lookup by name with parameter overrides.
inline Chart make_catalog_chart(const std::string& name,
                                const std::map<std::string, double>& params) {
  const CatalogEntry* entry = find_catalog_entry(name);
  if (entry == nullptr || name == "graph" || name == "custom")
    throw ConfigError("'" + name + "' is not a parametric catalog surface",
                      "/surface/name");
  std::map<std::string, double> p = entry->defaults;
  for (const auto& [k, v] : params) {
    if (!p.count(k))
      throw ConfigError("unknown parameter '" + k + "' for " + name,
                        "/surface/params/" + k);
    p[k] = v;
  }
  if (name == "sphere") return make_sphere(p["R"]);
  if (name == "ellipsoid") return make_ellipsoid(p["a"], p["b"], p["c"]);
  return make_torus(p["R"], p["r"]);
}

}  // namespace thinshell
