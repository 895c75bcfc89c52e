#pragma once

// The tubular neighbourhood of a hypersurface in Fermi coordinates (r, u),
// Y(r, u) = X(u) + r N(u), with the exact induced ambient metric
// g_bar = |dY|^2. All ambient quantities come from jets in the n + 1
// variables (r, u^1, ..., u^n), jet variable 0 being r.
//
// Tangent fields are extended off the surface by their boundary profile,
//   U^i(r, u) = V^i + r A^i + r^2/2 B^i,  U^r = 0,
// with A = a S V and B = b S^2 V; the profile fixes (a, b).

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thinshell/errors.hpp"
#include "thinshell/fields.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/jet.hpp"
#include "thinshell/jet_linalg.hpp"

namespace thinshell {

class BoundaryProfile {
 public:
  enum class Kind { Slip, Hodge, Alpha };

  static BoundaryProfile slip() { return BoundaryProfile(Kind::Slip, 0.0); }
  static BoundaryProfile hodge() { return BoundaryProfile(Kind::Hodge, 1.0); }
  static BoundaryProfile alpha(double a) {
    if (!std::isfinite(a)) throw DomainError("alpha must be finite");
    return BoundaryProfile(Kind::Alpha, a);
  }

  // "slip" | "hodge" | "alpha:<value>"
  static BoundaryProfile parse(const std::string& text) {
    if (text == "slip") return slip();
    if (text == "hodge") return hodge();
    if (text.rfind("alpha:", 0) == 0) {
      const std::string v = text.substr(6);
      double a = 0.0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), a);
      if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ConfigError("bad alpha value '" + v + "'", "/profiles");
      return alpha(a);
    }
    throw ConfigError("unknown profile '" + text + "' (slip | hodge | alpha:<value>)",
                      "/profiles");
  }

  Kind kind() const { return kind_; }
  // The interpolation parameter: 0 for slip, 1 for hodge.
  double alpha() const { return alpha_; }
  bool in_unit_interval() const { return alpha_ >= 0.0 && alpha_ <= 1.0; }

  // d_r U = first_coefficient() * S U at r = 0.
  double first_coefficient() const { return 2.0 * alpha_; }
  // d_r^2 U = second_coefficient() * S^2 U at r = 0, from differentiating
  // d_r U = 2 alpha S U once more with d_r S = S^2.
  double second_coefficient() const { return 2.0 * alpha_ * (1.0 + 2.0 * alpha_); }

  std::string label() const {
    switch (kind_) {
      case Kind::Slip: return "slip";
      case Kind::Hodge: return "hodge";
      case Kind::Alpha: return "alpha:" + detail::format_number(alpha_);
    }
    return "";
  }

 private:
  BoundaryProfile(Kind k, double a) : kind_(k), alpha_(a) {}
  Kind kind_;
  double alpha_;
};

struct ShellField {
  TangentField field;
  BoundaryProfile profile;
};

// First and second radial derivatives (A, B) induced at r = 0.
struct RadialProfile {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};

inline RadialProfile radial_profile(const BoundaryProfile& p, const Eigen::MatrixXd& shape,
                                    const Eigen::VectorXd& v) {
  return {p.first_coefficient() * (shape * v),
          p.second_coefficient() * (shape * shape * v)};
}

struct AmbientChristoffel {
  Eigen::MatrixXd normal_tangential;    // Gamma^r_ij
  Eigen::MatrixXd tangential_normal;    // Gamma^i_rj, (i, j)
  std::vector<Eigen::MatrixXd> tangential;  // Gamma^i_jk, [i](j, k)
  double rr_r = 0.0;                    // Gamma^r_rr
  Eigen::VectorXd rr_tangential;        // Gamma^i_rr
  Eigen::VectorXd ri_r;                 // Gamma^r_ri
};

// Shell geometry at (r0, u). Theorems are evaluated at r0 = 0.
class ShellGeometry {
 public:
  ShellGeometry(const Chart& chart, std::span<const double> u, double r0 = 0.0)
      : n_(chart.dim()), r0_(r0), surface_(surface_geometry(chart, u)) {
    const int nv = n_ + 1;
    if (r0 != 0.0) {
      const double focal = focal_radius(surface_.extrinsic, 1e300);
      if (std::abs(r0) >= focal)
        throw FocalDegeneracy("r = " + std::to_string(r0) + " is beyond the focal radius " +
                              std::to_string(focal));
    }
    seeds_.push_back(Jet::variable(0, r0, nv));
    for (int i = 0; i < n_; ++i)
      seeds_.push_back(Jet::variable(1 + i, u[static_cast<std::size_t>(i)], nv));
    const std::span<const Jet> useeds(seeds_.data() + 1, static_cast<std::size_t>(n_));
    frame_ = surface_frame(chart.embed(useeds), n_, 1);

    const Jet& r = seeds_[0];
    JetVector y;
    for (int a = 0; a <= n_; ++a)
      y.push_back(frame_.position[static_cast<std::size_t>(a)] + r * frame_.normal[static_cast<std::size_t>(a)]);
    std::vector<JetVector> dy(static_cast<std::size_t>(nv));
    for (int b = 0; b < nv; ++b)
      for (int a = 0; a <= n_; ++a) dy[static_cast<std::size_t>(b)].push_back(y[static_cast<std::size_t>(a)].derivative(b));

    metric_ = JetMatrix(nv, nv);
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) metric_(a, b) = dot(dy[static_cast<std::size_t>(a)], dy[static_cast<std::size_t>(b)]);
    try {
      detail::check_immersion(metric_.values());
      inverse_ = inverse(metric_);
    } catch (const Error& e) {
      throw FocalDegeneracy(std::string("shell metric degenerates: ") + e.what());
    }

    std::vector<JetMatrix> dg;
    for (int c = 0; c < nv; ++c) dg.push_back(metric_.derivative(c));
    for (int a = 0; a < nv; ++a) {
      JetMatrix gamma(nv, nv);
      for (int b = 0; b < nv; ++b)
        for (int c = 0; c < nv; ++c) {
          Jet s;
          for (int d = 0; d < nv; ++d)
            s += inverse_(a, d) * (dg[static_cast<std::size_t>(b)](d, c) + dg[static_cast<std::size_t>(c)](d, b) -
                                   dg[static_cast<std::size_t>(d)](b, c));
          gamma(b, c) = 0.5 * s;
        }
      christoffel_.push_back(std::move(gamma));
    }
  }

  int dim() const { return n_; }
  double r() const { return r0_; }
  const SurfaceGeometry& surface() const { return surface_; }
  // Surface quantities as jets in (r, u).
  const SurfaceFrame& frame() const { return frame_; }
  const JetMatrix& metric() const { return metric_; }
  const JetMatrix& inverse_metric() const { return inverse_; }
  // christoffel(a)(b, c) = Gamma_bar^a_bc; index 0 is r.
  const JetMatrix& christoffel(int a) const { return christoffel_[static_cast<std::size_t>(a)]; }

  // U^a as jets in (r, u); U^0 = U^r = 0.
  JetVector extend(const ShellField& sf) const {
    const int nv = n_ + 1;
    const std::span<const Jet> useeds(seeds_.data() + 1, static_cast<std::size_t>(n_));
    const JetVector v = sf.field.evaluate(useeds);
    const JetVector sv = frame_.shape * v;
    const JetVector ssv = frame_.shape * sv;
    const Jet& r = seeds_[0];
    const double a = sf.profile.first_coefficient();
    const double b = sf.profile.second_coefficient();
    JetVector u;
    u.push_back(Jet::constant(0.0, nv));
    for (int i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      u.push_back(v[k] + r * (a * sv[k]) + (0.5 * b) * (r * r * ssv[k]));
    }
    return u;
  }

  // nabla_bar_a nabla_bar_b U^c, indexed [c](a, b).
  std::vector<Eigen::MatrixXd> second_covariant(const ShellField& sf) const {
    const int nv = n_ + 1;
    const JetVector u = extend(sf);
    // first(c, b) = nabla_bar_b U^c
    JetMatrix first(nv, nv);
    for (int c = 0; c < nv; ++c)
      for (int b = 0; b < nv; ++b) {
        Jet s = u[static_cast<std::size_t>(c)].derivative(b);
        for (int d = 0; d < nv; ++d) s += christoffel(c)(b, d) * u[static_cast<std::size_t>(d)];
        first(c, b) = s;
      }
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(nv), Eigen::MatrixXd::Zero(nv, nv));
    for (int c = 0; c < nv; ++c)
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) {
          double s = first(c, b).derivative(a).value();
          for (int d = 0; d < nv; ++d) {
            s += christoffel(c)(a, d).value() * first(d, b).value();
            s -= christoffel(d)(a, b).value() * first(c, d).value();
          }
          out[static_cast<std::size_t>(c)](a, b) = s;
        }
    return out;
  }

  // U_a = g_bar_ab U^b as jets.
  JetVector lower(const JetVector& u) const {
    const int nv = n_ + 1;
    JetVector low;
    for (int a = 0; a < nv; ++a) {
      Jet s;
      for (int b = 0; b < nv; ++b) s += metric_(a, b) * u[static_cast<std::size_t>(b)];
      low.push_back(s);
    }
    return low;
  }

 private:
  int n_;
  double r0_;
  SurfaceGeometry surface_;
  JetVector seeds_;
  SurfaceFrame frame_;
  JetMatrix metric_, inverse_;
  std::vector<JetMatrix> christoffel_;
};

namespace detail {

inline double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

}  // namespace detail

// Table of ambient Christoffel symbols at the shell point.
inline AmbientChristoffel ambient_christoffel(const ShellGeometry& shell) {
  const int n = shell.dim();
  AmbientChristoffel t;
  t.normal_tangential = Eigen::MatrixXd(n, n);
  t.tangential_normal = Eigen::MatrixXd(n, n);
  t.rr_tangential = Eigen::VectorXd(n);
  t.ri_r = Eigen::VectorXd(n);
  t.rr_r = shell.christoffel(0)(0, 0).value();
  for (int i = 0; i < n; ++i) {
    t.rr_tangential(i) = shell.christoffel(1 + i)(0, 0).value();
    t.ri_r(i) = shell.christoffel(0)(0, 1 + i).value();
    Eigen::MatrixXd g(n, n);
    for (int j = 0; j < n; ++j) {
      t.normal_tangential(i, j) = shell.christoffel(0)(1 + i, 1 + j).value();
      t.tangential_normal(i, j) = shell.christoffel(1 + i)(0, 1 + j).value();
      for (int k = 0; k < n; ++k) g(j, k) = shell.christoffel(1 + i)(1 + j, 1 + k).value();
    }
    t.tangential.push_back(g);
  }
  return t;
}

// Tangential components of the ambient Bochner Laplacian of the extension,
// g_bar^ab nabla_bar_a nabla_bar_b U^i, from the shell metric alone.
inline Eigen::VectorXd ambient_bochner_tangential(const ShellGeometry& shell,
                                                  const ShellField& sf) {
  const int n = shell.dim();
  const auto second = shell.second_covariant(sf);
  const Eigen::MatrixXd ginv = shell.inverse_metric().values();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = (ginv.array() * second[static_cast<std::size_t>(1 + i)].array()).sum();
  return out;
}

struct TraceSplit {
  Eigen::VectorXd radial;      // g_bar^rr nabla_r nabla_r U^i
  Eigen::VectorXd tangential;  // g_bar^jk nabla_j nabla_k U^i
};

// The radial and tangential pieces of the trace, computed directly.
inline TraceSplit direct_traces(const ShellGeometry& shell, const ShellField& sf) {
  const int n = shell.dim();
  const auto second = shell.second_covariant(sf);
  const Eigen::MatrixXd ginv = shell.inverse_metric().values();
  TraceSplit t{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& h = second[static_cast<std::size_t>(1 + i)];
    t.radial(i) = ginv(0, 0) * h(0, 0);
    t.tangential(i) = (ginv.bottomRightCorner(n, n).array() * h.bottomRightCorner(n, n).array()).sum();
  }
  return t;
}

inline constexpr double kTraceConsistencyTolerance = 1e-6;

// nabla_r nabla_r U^i = d_r^2 U^i - 2 S^i_j d_r U^j.
inline Eigen::VectorXd radial_trace_closed(const ShellGeometry& shell, const ShellField& sf) {
  const auto& ex = shell.surface().extrinsic;
  const Eigen::VectorXd v = sf.field.evaluate(std::span<const double>(shell.surface().point));
  const RadialProfile p = radial_profile(sf.profile, ex.shape, v);
  return p.second - 2.0 * ex.shape * p.first;
}

// g^jk nabla_j nabla_k U^i = Delta_B V - S^2 V + nH S V - nH d_r U.
inline Eigen::VectorXd tangential_trace_closed(const ShellGeometry& shell, const ShellField& sf) {
  const SurfaceGeometry& s = shell.surface();
  const auto& ex = s.extrinsic;
  const FieldAtPoint fv(s, sf.field);
  const Eigen::VectorXd v = fv.value();
  const RadialProfile p = radial_profile(sf.profile, ex.shape, v);
  const double nh = shell.dim() * ex.mean_curvature;
  return bochner(fv) - ex.shape_squared * v + nh * (ex.shape * v) - nh * p.first;
}

// Closed forms, each checked against the direct computation.
inline Eigen::VectorXd radial_trace(const ShellGeometry& shell, const ShellField& sf) {
  const Eigen::VectorXd closed = radial_trace_closed(shell, sf);
  const double gap = detail::relative_gap(direct_traces(shell, sf).radial, closed);
  if (gap > kTraceConsistencyTolerance)
    throw ConsistencyFailure("radial trace: closed form and shell metric disagree by " +
                             std::to_string(gap));
  return closed;
}

inline Eigen::VectorXd tangential_trace(const ShellGeometry& shell, const ShellField& sf) {
  const Eigen::VectorXd closed = tangential_trace_closed(shell, sf);
  const double gap = detail::relative_gap(direct_traces(shell, sf).tangential, closed);
  if (gap > kTraceConsistencyTolerance)
    throw ConsistencyFailure("tangential trace: closed form and shell metric disagree by " +
                             std::to_string(gap));
  return closed;
}

// Radial boundary-shear term d_r^2 U - (nH Id + 2 S) d_r U, from the profile.
inline Eigen::VectorXd f_rad(const BoundaryProfile& profile, const SurfaceGeometry& s,
                             const TangentField& v) {
  const auto& ex = s.extrinsic;
  const Eigen::VectorXd val = v.evaluate(std::span<const double>(s.point));
  const RadialProfile p = radial_profile(profile, ex.shape, val);
  const int n = s.dim();
  const Eigen::MatrixXd coupling =
      n * ex.mean_curvature * Eigen::MatrixXd::Identity(n, n) + 2.0 * ex.shape;
  return p.second - coupling * p.first;
}

// (Def U)_ri = (nabla_bar_r U_i + nabla_bar_i U_r) / 2.
inline Eigen::VectorXd deformation_normal_tangential(const ShellGeometry& shell,
                                                     const ShellField& sf) {
  const int n = shell.dim();
  const int nv = n + 1;
  const JetVector low = shell.lower(shell.extend(sf));
  auto nabla = [&](int a, int b) {
    double s = low[static_cast<std::size_t>(b)].derivative(a).value();
    for (int c = 0; c < nv; ++c) s -= shell.christoffel(c)(a, b).value() * low[static_cast<std::size_t>(c)].value();
    return s;
  };
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = 0.5 * (nabla(0, 1 + i) + nabla(1 + i, 0));
  return out;
}

// d_r (g_ij(r) U^j(r)) at the shell point.
inline Eigen::VectorXd covariant_radial_constancy(const ShellGeometry& shell,
                                                  const ShellField& sf) {
  const int n = shell.dim();
  const JetVector low = shell.lower(shell.extend(sf));
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = low[static_cast<std::size_t>(1 + i)].derivative(0).value();
  return out;
}

struct MetricExpansionCheck {
  double r = 0.0;
  double residual = 0.0;       // max |g(r) - (g - 2r II + r^2 S^2)| at r
  double residual_half = 0.0;  // same at r/2
  std::optional<double> order;  // empty when both residuals are at roundoff
  double noise_floor = 0.0;
};

// Compares the metric of the offset surface X + rN with its quadratic
// expansion at r and r/2. In flat space the expansion is exact, so the
// residual normally sits at roundoff; the observed order is reported only
// when the residuals rise above that floor.
inline MetricExpansionCheck metric_expansion_check(const Chart& chart,
                                                   std::span<const double> u, double r) {
  const SurfaceGeometry s = surface_geometry(chart, u);
  const double focal = focal_radius(s.extrinsic, 1e300);
  if (std::abs(r) >= focal)
    throw FocalDegeneracy("r = " + std::to_string(r) + " is beyond the focal radius " +
                          std::to_string(focal));
  const Eigen::MatrixXd g = s.intrinsic.metric;
  const Eigen::MatrixXd ii = s.extrinsic.second_form;
  const Eigen::MatrixXd s2 = g * s.extrinsic.shape_squared;
  auto residual_at = [&](double rr) {
    const Eigen::MatrixXd gr = offset_frame(chart, u, rr).metric.values();
    return (gr - (g - 2.0 * rr * ii + rr * rr * s2)).cwiseAbs().maxCoeff();
  };
  MetricExpansionCheck c;
  c.r = r;
  c.residual = residual_at(r);
  c.residual_half = residual_at(0.5 * r);
  c.noise_floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + g.cwiseAbs().maxCoeff());
  if (c.residual > c.noise_floor && c.residual_half > c.noise_floor)
    c.order = std::log2(c.residual / c.residual_half);
  return c;
}

inline std::vector<MetricExpansionCheck> metric_expansion_check(
    const Chart& chart, std::span<const double> u, const std::vector<double>& r_values) {
  std::vector<MetricExpansionCheck> out;
  for (double r : r_values) out.push_back(metric_expansion_check(chart, u, r));
  return out;
}

// Single-shot forms.
inline Eigen::VectorXd ambient_bochner_tangential(const ShellField& sf, const Chart& chart,
                                                  std::span<const double> u) {
  return ambient_bochner_tangential(ShellGeometry(chart, u), sf);
}

inline Eigen::VectorXd f_rad(const BoundaryProfile& profile, const Chart& chart,
                             std::span<const double> u, const TangentField& v) {
  return f_rad(profile, surface_geometry(chart, u), v);
}

inline AmbientChristoffel ambient_christoffel(const Chart& chart, std::span<const double> u) {
  return ambient_christoffel(ShellGeometry(chart, u));
}

}  // namespace thinshell
