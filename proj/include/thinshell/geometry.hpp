#pragma once

// Intrinsic and extrinsic geometry of a parametrized hypersurface
// X: U subset R^n -> R^(n+1) at a chart point.
//
// Conventions:
//   * N is the normalized generalized cross product of d_1 X, ..., d_n X in
//     index order, i.e. <N, w> has the sign of det[w, d_1 X, ..., d_n X].
//     For the catalog sphere and ellipsoid this is the outward normal.
//   * S = -dN (S^k_i d_k X = -d_i N), II_ij = <d_ij X, N> = g(S d_i, d_j).
//     With the outward normal the unit sphere therefore has S = -Id, H = -1.
//   * Christoffel symbols are stored as christoffel[i](j, k) = Gamma^i_jk.
//   * riemann(i, j, k, l) is the d_i component of R(d_k, d_l) d_j and
//     Ric_ij = R^k_ikj, so the unit sphere has Ric = g.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thinshell/errors.hpp"
#include "thinshell/expr.hpp"
#include "thinshell/jet.hpp"
#include "thinshell/jet_linalg.hpp"

namespace thinshell {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

class Chart {
 public:
  Chart() = default;

  // sources: the n+1 ambient components as expressions in the chart
  // variables (u1..un unless given), with named numeric parameters.
  Chart(std::string name, std::vector<std::string> sources,
        std::vector<Interval> domain,
        std::map<std::string, double> parameters = {},
        std::vector<std::string> variables = {})
      : name_(std::move(name)),
        sources_(std::move(sources)),
        domain_(std::move(domain)),
        parameters_(std::move(parameters)),
        variables_(std::move(variables)) {
    if (sources_.size() < 2 || sources_.size() > kJetMaxVars)
      throw DegenerateImmersion(
          "a chart needs between 2 and " + std::to_string(kJetMaxVars) +
          " ambient components, got " + std::to_string(sources_.size()));
    const int n = static_cast<int>(sources_.size()) - 1;
    if (variables_.empty()) variables_ = chart_variables(n);
    if (static_cast<int>(domain_.size()) != n)
      throw DegenerateImmersion("chart domain has " +
                                std::to_string(domain_.size()) +
                                " intervals, expected " + std::to_string(n));
    for (const auto& s : sources_)
      components_.push_back(parse(s, variables_, parameters_));
  }

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(sources_.size()) - 1; }
  int ambient_dim() const { return static_cast<int>(sources_.size()); }
  const std::vector<Interval>& domain() const { return domain_; }
  const std::vector<std::string>& sources() const { return sources_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }
  const std::vector<Expr>& components() const { return components_; }

  // Same surface with chart variables a and b exchanged. Reverses the
  // orientation of N.
  Chart with_swapped_variables(int a, int b) const {
    std::vector<std::string> vars = variables_;
    std::swap(vars[static_cast<std::size_t>(a)], vars[static_cast<std::size_t>(b)]);
    std::vector<Interval> dom = domain_;
    std::swap(dom[static_cast<std::size_t>(a)], dom[static_cast<std::size_t>(b)]);
    return Chart(name_ + "[swap]", sources_, dom, parameters_, vars);
  }

  // Ambient components evaluated on caller-seeded jets.
  JetVector embed(std::span<const Jet> u) const {
    JetVector x;
    x.reserve(components_.size());
    for (const auto& c : components_) x.push_back(eval_jet(c, u));
    return x;
  }

  // Ambient components as jets in the n chart variables around u.
  JetVector embed(std::span<const double> u, int order = kJetMaxOrder) const {
    return embed(seeds(u, order));
  }

  JetVector seeds(std::span<const double> u, int order = kJetMaxOrder) const {
    JetVector s;
    for (int i = 0; i < dim(); ++i)
      s.push_back(Jet::variable(i, u[static_cast<std::size_t>(i)], dim(), order));
    return s;
  }

  Eigen::VectorXd position(std::span<const double> u) const {
    Eigen::VectorXd p(ambient_dim());
    for (int a = 0; a < ambient_dim(); ++a)
      p(a) = eval(components_[static_cast<std::size_t>(a)], u);
    return p;
  }

  // Domain box shrunk by `margin` (fraction of the width) on every side.
  std::vector<Interval> interior(double margin) const {
    std::vector<Interval> box = domain_;
    for (auto& iv : box) {
      const double w = iv.hi - iv.lo;
      iv.lo += margin * w;
      iv.hi -= margin * w;
    }
    return box;
  }

 private:
  std::string name_;
  std::vector<std::string> sources_;
  std::vector<Interval> domain_;
  std::map<std::string, double> parameters_;
  std::vector<std::string> variables_;
  std::vector<Expr> components_;
};

// Jets of the first- and second-order surface quantities. Chart variable k
// is jet variable var_offset + k; for the plain surface var_offset is 0, for
// the shell it is 1 (jet variable 0 is the normal coordinate r).
struct SurfaceFrame {
  int n = 0;
  int var_offset = 0;
  JetVector position;                  // X^A
  std::vector<JetVector> tangents;     // tangents[i][A] = d_i X^A
  JetVector normal;                    // N^A
  JetMatrix metric;                    // g_ij
  JetMatrix inverse_metric;            // g^ij
  JetMatrix second_form;               // II_ij
  JetMatrix shape;                     // S^i_j
  std::vector<JetMatrix> christoffel;  // christoffel[i](j, k) = Gamma^i_jk
};

struct ExtrinsicData {
  Eigen::VectorXd normal;
  Eigen::MatrixXd second_form;  // II_ij
  Eigen::MatrixXd shape;        // S^i_j
  Eigen::MatrixXd shape_squared;
  double mean_curvature = 0.0;  // tr(S) / n
  Eigen::VectorXd principal_curvatures;  // ascending
};

struct IntrinsicData {
  int n = 0;
  Eigen::MatrixXd metric;
  Eigen::MatrixXd inverse_metric;
  std::vector<Eigen::MatrixXd> metric_derivative;  // [k](i, j) = d_k g_ij
  std::vector<Eigen::MatrixXd> christoffel;        // [i](j, k)
  std::vector<std::vector<Eigen::MatrixXd>> christoffel_derivative;  // [l][i](j, k)
  std::vector<double> riemann_components;
  Eigen::MatrixXd ricci_mixed;  // Ric^i_j
  Eigen::MatrixXd ricci;        // Ric_ij

  double riemann(int i, int j, int k, int l) const {
    return riemann_components[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)];
  }
};

namespace detail {

// <N, w> = det[w, T_1, ..., T_n]: cofactor expansion along the first row.
inline JetVector generalized_cross(const std::vector<JetVector>& t) {
  const int n = static_cast<int>(t.size());
  JetVector out(static_cast<std::size_t>(n + 1));
  for (int a = 0; a <= n; ++a) {
    JetMatrix minor(n, n);
    for (int i = 0; i < n; ++i)
      for (int b = 0, c = 0; b <= n; ++b)
        if (b != a) minor(i, c++) = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
    const Jet d = determinant(minor);
    out[static_cast<std::size_t>(a)] = a % 2 == 0 ? d : -d;
  }
  return out;
}

// Scale-free immersion test: det(g) / lambda_max(g)^n.
inline void check_immersion(const Eigen::MatrixXd& g, double cutoff = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const double top = es.eigenvalues().maxCoeff();
  const double ratio =
      top > 0.0 ? g.determinant() / std::pow(top, static_cast<double>(g.rows())) : 0.0;
  if (!(ratio > cutoff))
    throw DegenerateImmersion("chart tangents are (nearly) dependent: det(g)/"
                              "lambda_max^n = " + std::to_string(ratio));
}

}  // namespace detail

inline SurfaceFrame surface_frame(const JetVector& position, int n,
                                  int var_offset = 0) {
  SurfaceFrame f;
  f.n = n;
  f.var_offset = var_offset;
  f.position = position;
  const int m = n + 1;
  for (int i = 0; i < n; ++i) {
    JetVector t;
    for (int a = 0; a < m; ++a) t.push_back(position[static_cast<std::size_t>(a)].derivative(var_offset + i));
    f.tangents.push_back(std::move(t));
  }
  f.metric = JetMatrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.metric(i, j) = dot(f.tangents[static_cast<std::size_t>(i)], f.tangents[static_cast<std::size_t>(j)]);
  detail::check_immersion(f.metric.values());
  f.inverse_metric = inverse(f.metric);

  JetVector cross = detail::generalized_cross(f.tangents);
  const Jet len = sqrt(dot(cross, cross));
  for (auto& c : cross) c = c / len;
  f.normal = std::move(cross);

  f.second_form = JetMatrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      JetVector dij;
      for (int a = 0; a < m; ++a)
        dij.push_back(f.tangents[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].derivative(var_offset + j));
      f.second_form(i, j) = dot(dij, f.normal);
    }
  f.shape = f.inverse_metric * f.second_form;

  std::vector<JetMatrix> dg;
  for (int k = 0; k < n; ++k) dg.push_back(f.metric.derivative(var_offset + k));
  for (int i = 0; i < n; ++i) {
    JetMatrix gamma(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet s;
        for (int l = 0; l < n; ++l)
          s += f.inverse_metric(i, l) *
               (dg[static_cast<std::size_t>(j)](l, k) + dg[static_cast<std::size_t>(k)](l, j) -
                dg[static_cast<std::size_t>(l)](j, k));
        gamma(j, k) = 0.5 * s;
      }
    f.christoffel.push_back(std::move(gamma));
  }
  return f;
}

inline ExtrinsicData extrinsic_from(const SurfaceFrame& f) {
  ExtrinsicData ex;
  ex.normal = values(f.normal);
  ex.second_form = f.second_form.values();
  ex.shape = f.shape.values();
  ex.shape_squared = ex.shape * ex.shape;
  ex.mean_curvature = ex.shape.trace() / f.n;

  // Eigenvalues of S from the symmetric form g^{-1/2} II g^{-1/2}.
  const Eigen::MatrixXd g = f.metric.values();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::MatrixXd g_inv_sqrt = es.operatorInverseSqrt();
  Eigen::MatrixXd sym = g_inv_sqrt * ex.second_form * g_inv_sqrt;
  sym = 0.5 * (sym + sym.transpose());
  ex.principal_curvatures =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues();
  return ex;
}

inline IntrinsicData intrinsic_from(const SurfaceFrame& f) {
  const int n = f.n;
  const auto un = static_cast<std::size_t>(n);
  IntrinsicData in;
  in.n = n;
  in.metric = f.metric.values();
  in.inverse_metric = f.inverse_metric.values();
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d(i, j) = f.metric(i, j).derivative(f.var_offset + k).value();
    in.metric_derivative.push_back(d);
  }
  for (int i = 0; i < n; ++i) in.christoffel.push_back(f.christoffel[static_cast<std::size_t>(i)].values());
  in.christoffel_derivative.assign(un, {});
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      in.christoffel_derivative[static_cast<std::size_t>(l)].push_back(
          f.christoffel[static_cast<std::size_t>(i)].derivative(f.var_offset + l).values());

  const auto& G = in.christoffel;
  const auto& dG = in.christoffel_derivative;
  in.riemann_components.assign(un * un * un * un, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = dG[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)](l, j) -
                     dG[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)](k, j);
          for (int m = 0; m < n; ++m)
            r += G[static_cast<std::size_t>(i)](k, m) * G[static_cast<std::size_t>(m)](l, j) -
                 G[static_cast<std::size_t>(i)](l, m) * G[static_cast<std::size_t>(m)](k, j);
          in.riemann_components[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)] = r;
        }
  in.ricci = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) in.ricci(i, j) += in.riemann(k, i, k, j);
  in.ricci_mixed = in.inverse_metric * in.ricci;
  return in;
}

// Everything at one chart point, computed once from order-4 jets.
struct SurfaceGeometry {
  std::vector<double> point;
  SurfaceFrame frame;
  ExtrinsicData extrinsic;
  IntrinsicData intrinsic;

  int dim() const { return frame.n; }
};

inline SurfaceGeometry surface_geometry(const Chart& chart,
                                        std::span<const double> u) {
  SurfaceGeometry s;
  s.point.assign(u.begin(), u.end());
  s.frame = surface_frame(chart.embed(u), chart.dim());
  s.extrinsic = extrinsic_from(s.frame);
  s.intrinsic = intrinsic_from(s.frame);
  return s;
}

inline ExtrinsicData extrinsic_at(const Chart& chart, std::span<const double> u) {
  return extrinsic_from(surface_frame(chart.embed(u, 2), chart.dim()));
}

inline IntrinsicData intrinsic_at(const Chart& chart, std::span<const double> u) {
  return intrinsic_from(surface_frame(chart.embed(u, 3), chart.dim()));
}

// Gauss equation for a hypersurface in flat space: Ric^i_j = nH S^i_j - (S^2)^i_j.
inline Eigen::MatrixXd gauss_ricci(const ExtrinsicData& ex, int n) {
  return n * ex.mean_curvature * ex.shape - ex.shape_squared;
}

// 1 / max |kappa_i|, capped at `cap` for (locally) flat surfaces.
inline double focal_radius(const ExtrinsicData& ex, double cap = 1e3) {
  const double k = ex.principal_curvatures.cwiseAbs().maxCoeff();
  return k > 1.0 / cap ? 1.0 / k : cap;
}

// Characteristic length used to cap focal radii: the larger of 1 and |X(u)|.
inline double length_scale(const Chart& chart, std::span<const double> u) {
  return std::max(1.0, chart.position(u).norm());
}

// Jets (order 3) of the offset surface X + rN around u.
inline JetVector offset_embedding(const Chart& chart, std::span<const double> u,
                                  double r) {
  const SurfaceFrame f = surface_frame(chart.embed(u), chart.dim());
  JetVector y;
  for (int a = 0; a < chart.ambient_dim(); ++a)
    y.push_back(f.position[static_cast<std::size_t>(a)] + r * f.normal[static_cast<std::size_t>(a)]);
  return y;
}

inline SurfaceFrame offset_frame(const Chart& chart, std::span<const double> u,
                                 double r) {
  try {
    return surface_frame(offset_embedding(chart, u, r), chart.dim());
  } catch (const DegenerateImmersion& e) {
    throw FocalDegeneracy("offset surface at r = " + std::to_string(r) +
                          " degenerates: " + e.what());
  }
}

struct RadialShapeDerivative {
  Eigen::MatrixXd derivative;     // Richardson-extrapolated d_r S at r = 0
  Eigen::MatrixXd central_step;   // central difference with step h
  Eigen::MatrixXd central_half;   // central difference with step h/2
  Eigen::MatrixXd shape_squared;  // S^2 at r = 0
  double step = 0.0;
};

// d_r S at r = 0 from the shape operators of the offset surfaces X + rN,
// by central differences at steps h and h/2 and one Richardson step.
// step <= 0 selects h = 1e-3 * focal radius.
inline RadialShapeDerivative shape_radial_derivative(const Chart& chart,
                                                     std::span<const double> u,
                                                     double step = 0.0) {
  const ExtrinsicData ex = extrinsic_at(chart, u);
  const double focal = focal_radius(ex, length_scale(chart, u));
  const double h = step > 0.0 ? step : 1e-3 * focal;
  if (h >= focal)
    throw FocalDegeneracy("radial step " + std::to_string(h) +
                          " reaches the focal radius " + std::to_string(focal));
  auto shape_at = [&](double r) { return offset_frame(chart, u, r).shape.values(); };
  RadialShapeDerivative out;
  out.step = h;
  out.shape_squared = ex.shape_squared;
  out.central_step = (shape_at(h) - shape_at(-h)) / (2.0 * h);
  out.central_half = (shape_at(0.5 * h) - shape_at(-0.5 * h)) / h;
  out.derivative = (4.0 * out.central_half - out.central_step) / 3.0;
  return out;
}

}  // namespace thinshell
