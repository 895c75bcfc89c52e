#pragma once

// The verification, operator and convergence runs behind the command line,
// plus the report writers. Results are plain records; output order is the
// canonical sort of the check tuple, never the execution order.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "thinshell/config.hpp"
#include "thinshell/oracle.hpp"
#include "thinshell/shell.hpp"

namespace thinshell {

struct CheckRecord {
  std::string check;
  int surface_index = 0;
  std::string surface;
  std::string profile;  // empty when the check does not depend on one
  std::optional<double> alpha;
  int field = -1;  // -1 when the check does not depend on a field
  int point_index = -1;
  std::vector<double> point;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  bool pass = false;
  std::optional<double> order;
  std::optional<double> value;  // auxiliary measurement, e.g. a gap norm
  std::string note;
};

struct Outcome {
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::optional<double> order;
  std::optional<double> value;
  std::string note;
};

namespace detail {

inline double abs_max(const Eigen::MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline std::optional<double> observed_order(double coarse, double fine, double floor = 1e-14) {
  if (coarse > floor && fine > floor) return std::log2(coarse / fine);
  return std::nullopt;
}

inline Outcome within(double residual, double tol) { return {residual, residual <= tol, {}, {}, {}}; }

// Runs one check; geometry or evaluation errors become a failed record.
inline void attempt(std::vector<CheckRecord>& out, CheckRecord rec,
                    const std::function<Outcome()>& body) {
  try {
    const Outcome o = body();
    rec.residual = o.residual;
    rec.pass = o.pass && std::isfinite(o.residual);
    rec.order = o.order;
    rec.value = o.value;
    rec.note = o.note;
  } catch (const Error& e) {
    rec.pass = false;
    rec.note = e.what();
  }
  out.push_back(std::move(rec));
}

inline void sort_records(std::vector<CheckRecord>& records) {
  std::sort(records.begin(), records.end(), [](const CheckRecord& a, const CheckRecord& b) {
    return std::tie(a.surface_index, a.check, a.profile, a.field, a.point_index) <
           std::tie(b.surface_index, b.check, b.profile, b.field, b.point_index);
  });
}

}  // namespace detail

// Coefficients fitted to f(alpha) = c0 + c1 alpha + c2 alpha^2 per component;
// returns the largest fit residual relative to 1 + max |f|.
inline double quadratic_fit_residual(const std::vector<double>& alphas,
                                     const std::vector<Eigen::VectorXd>& values) {
  const auto m = static_cast<Eigen::Index>(alphas.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::MatrixXd y(m, values.front().size());
  for (Eigen::Index k = 0; k < m; ++k) {
    const double x = alphas[static_cast<std::size_t>(k)];
    a.row(k) << 1.0, x, x * x;
    y.row(k) = values[static_cast<std::size_t>(k)].transpose();
  }
  const Eigen::MatrixXd coef = a.colPivHouseholderQr().solve(y);
  return detail::abs_max(a * coef - y) / (1.0 + detail::abs_max(y));
}

inline std::vector<CheckRecord> run_verify(const RunConfig& cfg) {
  std::vector<CheckRecord> out;
  for (std::size_t si = 0; si < cfg.surfaces.size(); ++si) {
    const SurfaceCase& sc = cfg.surfaces[si];
    const Chart& chart = sc.chart;
    const int n = chart.dim();
    const auto fields = cfg.fields(n);
    const auto points = sample_points(cfg, chart);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const std::vector<double>& u = points[pi];
      auto record = [&](const std::string& check, const std::string& tol_key, int field = -1,
                        const BoundaryProfile* p = nullptr) {
        CheckRecord r;
        r.check = check;
        r.surface_index = static_cast<int>(si);
        r.surface = sc.label;
        r.point_index = static_cast<int>(pi);
        r.point = u;
        r.field = field;
        r.tolerance = cfg.tol(tol_key);
        if (p != nullptr) {
          r.profile = p->label();
          r.alpha = p->alpha();
        }
        return r;
      };

      std::optional<ShellGeometry> shell;
      try {
        shell.emplace(chart, u);
      } catch (const Error& e) {
        CheckRecord r = record("geometry", "gauss");
        r.note = e.what();
        out.push_back(r);
        continue;
      }
      const SurfaceGeometry& geo = shell->surface();
      const ExtrinsicData& ex = geo.extrinsic;

      detail::attempt(out, record("gauss", "gauss"), [&] {
        return detail::within(detail::abs_max(geo.intrinsic.ricci_mixed - gauss_ricci(ex, n)),
                              cfg.tol("gauss"));
      });
      detail::attempt(out, record("christoffel", "christoffel"), [&] {
        const AmbientChristoffel t = ambient_christoffel(*shell);
        double r = std::max(detail::relative_gap(t.normal_tangential, ex.second_form),
                            detail::relative_gap(t.tangential_normal, -ex.shape));
        for (int i = 0; i < n; ++i)
          r = std::max(r, detail::relative_gap(t.tangential[static_cast<std::size_t>(i)],
                                               geo.intrinsic.christoffel[static_cast<std::size_t>(i)]));
        r = std::max({r, std::abs(t.rr_r), detail::abs_max(t.rr_tangential), detail::abs_max(t.ri_r)});
        return detail::within(r, cfg.tol("christoffel"));
      });
      detail::attempt(out, record("shape_radial", "shape_radial"), [&] {
        const RadialShapeDerivative d = shape_radial_derivative(chart, u);
        Outcome o = detail::within(detail::relative_gap(d.derivative, d.shape_squared),
                                   cfg.tol("shape_radial"));
        o.order = detail::observed_order(detail::relative_gap(d.central_step, d.shape_squared),
                                         detail::relative_gap(d.central_half, d.shape_squared));
        return o;
      });
      detail::attempt(out, record("metric_expansion", "metric_expansion"), [&] {
        const double r = 0.1 * focal_radius(ex, length_scale(chart, u));
        const MetricExpansionCheck c = metric_expansion_check(chart, u, r);
        Outcome o;
        o.residual = std::max(c.residual, c.residual_half);
        o.order = c.order;
        if (c.order) {
          o.pass = *c.order >= cfg.tol("metric_expansion");
        } else {
          o.pass = true;
          o.note = "remainder at roundoff at r and r/2 (exact expansion); order not observable";
        }
        return o;
      });

      for (std::size_t fi = 0; fi < fields.size(); ++fi) {
        const TangentField& v = fields[fi];
        const int f = static_cast<int>(fi);
        std::optional<IntrinsicOperators> ops;
        try {
          ops = intrinsic_operators(FieldAtPoint(geo, v));
        } catch (const Error& e) {
          CheckRecord r = record("field", "theorem", f);
          r.note = e.what();
          out.push_back(r);
          continue;
        }

        detail::attempt(out, record("weitzenboeck", "weitzenboeck", f), [&] {
          return detail::within(detail::relative_gap(ops->hodge, ops->bochner - ops->ricci),
                                cfg.tol("weitzenboeck"));
        });
        detail::attempt(out, record("extrinsic_coupling", "extrinsic_coupling", f), [&] {
          const Eigen::VectorXd gap = ops->alpha(0.5) - ops->hodge;
          const Eigen::VectorXd predicted =
              (n * ex.mean_curvature * ex.shape - 2.0 * ex.shape_squared) * ops->field;
          Outcome o = detail::within(detail::relative_gap(gap, predicted),
                                     cfg.tol("extrinsic_coupling"));
          o.value = gap.norm() / std::max(ops->field.norm(), 1e-300);
          return o;
        });

        std::vector<double> alpha_grid;
        std::vector<Eigen::VectorXd> alpha_values;
        for (const BoundaryProfile& p : cfg.profiles) {
          const ShellField sf{v, p};
          std::optional<Eigen::VectorXd> amb;
          detail::attempt(out, record("theorem", "theorem", f, &p), [&] {
            amb = ambient_bochner_tangential(*shell, sf);
            Eigen::VectorXd want;
            switch (p.kind()) {
              case BoundaryProfile::Kind::Slip: want = ops->deformation(); break;
              case BoundaryProfile::Kind::Hodge: want = ops->hodge; break;
              case BoundaryProfile::Kind::Alpha: want = ops->alpha(p.alpha()); break;
            }
            return detail::within(detail::relative_gap(*amb, want), cfg.tol("theorem"));
          });
          if (amb && p.kind() == BoundaryProfile::Kind::Alpha) {
            alpha_grid.push_back(p.alpha());
            alpha_values.push_back(*amb);
          }
          detail::attempt(out, record("decomposition", "decomposition", f, &p), [&] {
            const Eigen::VectorXd total = amb ? *amb : ambient_bochner_tangential(*shell, sf);
            return detail::within(
                detail::relative_gap(total, ops->deformation() + f_rad(p, geo, v)),
                cfg.tol("decomposition"));
          });
          detail::attempt(out, record("f_rad", "f_rad", f, &p), [&] {
            const Eigen::VectorXd fr = f_rad(p, geo, v);
            if (p.kind() == BoundaryProfile::Kind::Slip)
              return Outcome{detail::abs_max(fr), detail::abs_max(fr) == 0.0, {}, {}, "must vanish exactly"};
            const double a = p.alpha();
            const Eigen::VectorXd want =
                -2.0 * a * ops->ricci - 4.0 * a * (1.0 - a) * ops->shape_squared;
            return detail::within(detail::relative_gap(fr, want), cfg.tol("f_rad"));
          });
          detail::attempt(out, record("trace_consistency", "trace_consistency", f, &p), [&] {
            const TraceSplit d = direct_traces(*shell, sf);
            return detail::within(
                std::max(detail::relative_gap(d.radial, radial_trace_closed(*shell, sf)),
                         detail::relative_gap(d.tangential, tangential_trace_closed(*shell, sf))),
                cfg.tol("trace_consistency"));
          });
          const RadialProfile prof = radial_profile(p, ex.shape, ops->field);
          const Eigen::MatrixXd& g = geo.intrinsic.metric;
          detail::attempt(out, record("normal_deformation", "normal_deformation", f, &p), [&] {
            const Eigen::VectorXd want = 0.5 * g * prof.first;
            return detail::within(detail::relative_gap(deformation_normal_tangential(*shell, sf), want),
                                  cfg.tol("normal_deformation"));
          });
          detail::attempt(out, record("radial_constancy", "radial_constancy", f, &p), [&] {
            const Eigen::VectorXd want = -2.0 * ex.second_form * ops->field + g * prof.first;
            return detail::within(detail::relative_gap(covariant_radial_constancy(*shell, sf), want),
                                  cfg.tol("radial_constancy"));
          });
          if (cfg.oracle)
            detail::attempt(out, record("oracle", "oracle", f, &p), [&] {
              const OracleComparison c = compare_with_shell(sf, chart, u, cfg.oracle_step);
              Outcome o;
              o.residual = c.error;
              o.order = c.order;
              o.pass = c.error <= cfg.tol("oracle") && c.order &&
                       std::abs(*c.order - 2.0) <= cfg.tol("oracle_order");
              if (!c.order) o.note = "stencil error at roundoff; order not observable";
              return o;
            });
        }
        if (alpha_grid.size() >= 4) {
          CheckRecord r = record("alpha_quadratic", "alpha_quadratic", f);
          r.profile = "alpha:*";
          detail::attempt(out, r, [&] {
            return detail::within(quadratic_fit_residual(alpha_grid, alpha_values),
                                  cfg.tol("alpha_quadratic"));
          });
        }
      }
    }
  }
  detail::sort_records(out);
  return out;
}

struct OperatorRow {
  std::string surface;
  int field = 0;
  int point_index = 0;
  std::vector<double> point;
  double alpha = 0.0;
  Eigen::VectorXd alpha_operator, deformation, hodge, bochner;
};

inline std::vector<OperatorRow> run_operator(const RunConfig& cfg) {
  std::vector<OperatorRow> rows;
  for (const SurfaceCase& sc : cfg.surfaces) {
    const auto fields = cfg.fields(sc.chart.dim());
    const auto points = sample_points(cfg, sc.chart);
    for (std::size_t fi = 0; fi < fields.size(); ++fi)
      for (std::size_t pi = 0; pi < points.size(); ++pi) {
        const SurfaceGeometry geo = surface_geometry(sc.chart, points[pi]);
        const IntrinsicOperators ops = intrinsic_operators(FieldAtPoint(geo, fields[fi]));
        for (double a : cfg.alphas)
          rows.push_back({sc.label, static_cast<int>(fi), static_cast<int>(pi), points[pi], a,
                          ops.alpha(a), ops.deformation(), ops.hodge, ops.bochner});
      }
  }
  return rows;
}

struct ConvergenceRow {
  std::string check;
  std::string surface;
  std::string profile;
  int point_index = 0;
  std::vector<double> point;
  double step = 0.0;
  double error_step = 0.0;  // at step
  double error_half = 0.0;  // at step / 2
  std::optional<double> order;
  std::string note;
};

inline std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg) {
  std::vector<ConvergenceRow> rows;
  for (const SurfaceCase& sc : cfg.surfaces) {
    const Chart& chart = sc.chart;
    const auto fields = cfg.fields(chart.dim());
    const auto points = sample_points(cfg, chart);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const std::vector<double>& u = points[pi];
      const int idx = static_cast<int>(pi);
      auto guarded = [&](const std::string& check, const std::string& profile,
                         const std::function<void(ConvergenceRow&)>& body) {
        ConvergenceRow row{check, sc.label, profile, idx, u, 0.0, 0.0, 0.0, {}, {}};
        try {
          body(row);
        } catch (const Error& e) {
          row.note = e.what();
        }
        rows.push_back(row);
      };
      const double focal = focal_radius(extrinsic_at(chart, u), length_scale(chart, u));
      guarded("metric_expansion", "", [&](ConvergenceRow& row) {
        const MetricExpansionCheck c = metric_expansion_check(chart, u, 0.1 * focal);
        row.step = c.r;
        row.error_step = c.residual;
        row.error_half = c.residual_half;
        row.order = c.order;
        if (!c.order) row.note = "exact";
      });
      guarded("shape_radial", "", [&](ConvergenceRow& row) {
        const RadialShapeDerivative d = shape_radial_derivative(chart, u, 2e-2 * focal);
        row.step = d.step;
        row.error_step = detail::relative_gap(d.central_step, d.shape_squared);
        row.error_half = detail::relative_gap(d.central_half, d.shape_squared);
        row.order = detail::observed_order(row.error_step, row.error_half);
      });
      if (!fields.empty())
        for (const BoundaryProfile& p : cfg.profiles)
          guarded("oracle", p.label(), [&](ConvergenceRow& row) {
            const OracleComparison c = compare_with_shell({fields.front(), p}, chart, u, cfg.oracle_step);
            row.step = 0.01 * focal;
            row.error_step = c.error_step;
            row.error_half = c.error_half;
            row.order = c.order;
          });
    }
  }
  return rows;
}

// ---- writers ----

namespace detail {

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json optional_number(const std::optional<double>& x) {
  return x && std::isfinite(*x) ? Json(*x) : Json(nullptr);
}

inline std::string csv_number(double x) { return std::isfinite(x) ? format_number(x) : ""; }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::size_t max_dim(const std::vector<std::vector<double>>& pts) {
  std::size_t n = 0;
  for (const auto& p : pts) n = std::max(n, p.size());
  return n;
}

inline Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

}  // namespace detail

struct RunMetadata {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::optional<double> wall_time;  // only when requested; breaks byte-identity
};

inline Json metadata_json(const RunMetadata& m) {
  Json j{{"command", m.command}, {"seed", m.seed}, {"config_hash", m.config_hash}};
  if (m.wall_time) j["wall_time_s"] = *m.wall_time;
  return j;
}

inline std::size_t count_failures(const std::vector<CheckRecord>& records) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return !r.pass; }));
}

inline void write_verify_json(std::ostream& os, const RunMetadata& meta,
                              const std::vector<CheckRecord>& records) {
  Json recs = Json::array();
  for (const auto& r : records) {
    recs.push_back(Json{{"check", r.check},
                        {"surface", r.surface},
                        {"profile", r.profile.empty() ? Json(nullptr) : Json(r.profile)},
                        {"alpha", detail::optional_number(r.alpha)},
                        {"field", r.field < 0 ? Json(nullptr) : Json(r.field)},
                        {"point_index", r.point_index},
                        {"point", r.point},
                        {"residual", detail::number_or_null(r.residual)},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass},
                        {"order", detail::optional_number(r.order)},
                        {"value", detail::optional_number(r.value)},
                        {"note", r.note.empty() ? Json(nullptr) : Json(r.note)}});
  }
  Json m = metadata_json(meta);
  m["checks"] = records.size();
  m["failures"] = count_failures(records);
  os << Json{{"metadata", m}, {"records", recs}}.dump(2) << "\n";
}

inline void write_verify_csv(std::ostream& os, const std::vector<CheckRecord>& records) {
  std::vector<std::vector<double>> pts;
  for (const auto& r : records) pts.push_back(r.point);
  const std::size_t n = detail::max_dim(pts);
  os << "check_id,surface,profile,alpha,field";
  for (std::size_t i = 1; i <= n; ++i) os << ",u" << i;
  os << ",residual,tolerance,pass,order\n";
  for (const auto& r : records) {
    os << r.check << "," << detail::csv_field(r.surface) << "," << r.profile << ","
       << (r.alpha ? detail::csv_number(*r.alpha) : "") << ","
       << (r.field < 0 ? "" : std::to_string(r.field));
    for (std::size_t i = 0; i < n; ++i)
      os << "," << (i < r.point.size() ? detail::csv_number(r.point[i]) : "");
    os << "," << detail::csv_number(r.residual) << "," << detail::csv_number(r.tolerance) << ","
       << (r.pass ? "true" : "false") << "," << (r.order ? detail::csv_number(*r.order) : "")
       << "\n";
  }
}

inline void write_operator_json(std::ostream& os, const RunMetadata& meta,
                                const std::vector<OperatorRow>& rows) {
  Json recs = Json::array();
  for (const auto& r : rows)
    recs.push_back(Json{{"surface", r.surface},
                        {"field", r.field},
                        {"point_index", r.point_index},
                        {"point", r.point},
                        {"alpha", r.alpha},
                        {"alpha_operator", detail::vector_json(r.alpha_operator)},
                        {"deformation", detail::vector_json(r.deformation)},
                        {"hodge", detail::vector_json(r.hodge)},
                        {"bochner", detail::vector_json(r.bochner)}});
  os << Json{{"metadata", metadata_json(meta)}, {"rows", recs}}.dump(2) << "\n";
}

inline void write_operator_csv(std::ostream& os, const std::vector<OperatorRow>& rows) {
  std::vector<std::vector<double>> pts;
  for (const auto& r : rows) pts.push_back(r.point);
  const std::size_t n = detail::max_dim(pts);
  os << "surface,field,point_index";
  for (std::size_t i = 1; i <= n; ++i) os << ",u" << i;
  os << ",alpha";
  for (const char* op : {"alpha_operator", "deformation", "hodge", "bochner"})
    for (std::size_t i = 1; i <= n; ++i) os << "," << op << "_" << i;
  os << "\n";
  for (const auto& r : rows) {
    os << detail::csv_field(r.surface) << "," << r.field << "," << r.point_index;
    for (std::size_t i = 0; i < n; ++i)
      os << "," << (i < r.point.size() ? detail::csv_number(r.point[i]) : "");
    os << "," << detail::csv_number(r.alpha);
    for (const Eigen::VectorXd* v : {&r.alpha_operator, &r.deformation, &r.hodge, &r.bochner})
      for (std::size_t i = 0; i < n; ++i)
        os << "," << (static_cast<Eigen::Index>(i) < v->size() ? detail::csv_number((*v)(static_cast<Eigen::Index>(i))) : "");
    os << "\n";
  }
}

inline void write_convergence_json(std::ostream& os, const RunMetadata& meta,
                                   const std::vector<ConvergenceRow>& rows) {
  Json recs = Json::array();
  for (const auto& r : rows)
    recs.push_back(Json{{"check", r.check},
                        {"surface", r.surface},
                        {"profile", r.profile.empty() ? Json(nullptr) : Json(r.profile)},
                        {"point_index", r.point_index},
                        {"point", r.point},
                        {"step", r.step},
                        {"error_step", detail::number_or_null(r.error_step)},
                        {"error_half", detail::number_or_null(r.error_half)},
                        {"order", detail::optional_number(r.order)},
                        {"note", r.note.empty() ? Json(nullptr) : Json(r.note)}});
  os << Json{{"metadata", metadata_json(meta)}, {"rows", recs}}.dump(2) << "\n";
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  std::vector<std::vector<double>> pts;
  for (const auto& r : rows) pts.push_back(r.point);
  const std::size_t n = detail::max_dim(pts);
  os << "check_id,surface,profile,point_index";
  for (std::size_t i = 1; i <= n; ++i) os << ",u" << i;
  os << ",step,error_step,error_half,order,note\n";
  for (const auto& r : rows) {
    os << r.check << "," << detail::csv_field(r.surface) << "," << r.profile << "," << r.point_index;
    for (std::size_t i = 0; i < n; ++i)
      os << "," << (i < r.point.size() ? detail::csv_number(r.point[i]) : "");
    os << "," << detail::csv_number(r.step) << "," << detail::csv_number(r.error_step) << ","
       << detail::csv_number(r.error_half) << "," << (r.order ? detail::csv_number(*r.order) : "")
       << "," << detail::csv_field(r.note) << "\n";
  }
}

}  // namespace thinshell
