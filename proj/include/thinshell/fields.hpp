#pragma once

// Tangent vector fields on a chart and the intrinsic vector Laplacians.
//
// Sign conventions: the Bochner Laplacian is the plain trace
// g^jk nabla_j nabla_k V (so it is +d^2 componentwise on the plane), and the
// Hodge Laplacian is -(d delta + delta d) acting on V^flat, raised again. With
// these signs Weitzenboeck reads Delta_H = Delta_B - Ric. The Hodge operator
// is assembled from d and delta only; it never touches the Ricci tensor.

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "thinshell/expr.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/jet.hpp"
#include "thinshell/jet_linalg.hpp"

namespace thinshell {

class TangentField {
 public:
  TangentField() = default;
  TangentField(std::vector<std::string> sources, int n,
               const std::map<std::string, double>& parameters = {})
      : sources_(std::move(sources)) {
    if (static_cast<int>(sources_.size()) != n)
      throw IndexOutOfRange("tangent field needs " + std::to_string(n) +
                            " components, got " + std::to_string(sources_.size()));
    const auto vars = chart_variables(n);
    for (const auto& s : sources_) components_.push_back(parse(s, vars, parameters));
  }

  int dim() const { return static_cast<int>(components_.size()); }
  const std::vector<std::string>& sources() const { return sources_; }

  JetVector evaluate(std::span<const Jet> u) const {
    JetVector v;
    for (const auto& c : components_) v.push_back(eval_jet(c, u));
    return v;
  }

  Eigen::VectorXd evaluate(std::span<const double> u) const {
    Eigen::VectorXd v(dim());
    for (int i = 0; i < dim(); ++i) v(i) = eval(components_[static_cast<std::size_t>(i)], u);
    return v;
  }

 private:
  std::vector<std::string> sources_;
  std::vector<Expr> components_;
};

// Trigonometric polynomial field with seeded coefficients:
// V^i = c_i + sum_t a_it sin(p_it . u + phase_it).
inline TangentField random_field(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> freq(-2, 2);
  std::vector<std::string> comps;
  for (int i = 0; i < n; ++i) {
    std::string s = detail::format_number(coeff(rng));
    for (int t = 0; t < 3; ++t) {
      s += " + " + detail::format_number(coeff(rng)) + "*sin(";
      for (int k = 0; k < n; ++k)
        s += std::to_string(freq(rng)) + "*u" + std::to_string(k + 1) + " + ";
      s += detail::format_number(phase(rng)) + ")";
    }
    comps.push_back(s);
  }
  return TangentField(comps, n);
}

namespace detail {

inline JetVector field_jets(const TangentField& v, const SurfaceFrame& f,
                            std::span<const double> u) {
  const int nv = f.position[0].num_vars();
  JetVector seeds;
  for (int i = 0; i < f.n; ++i)
    seeds.push_back(Jet::variable(f.var_offset + i, u[static_cast<std::size_t>(i)], nv));
  return v.evaluate(seeds);
}

// nabla_j V^i as jets, (i, j).
inline JetMatrix covariant_jets(const SurfaceFrame& f, const JetVector& v) {
  const int n = f.n;
  JetMatrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = v[static_cast<std::size_t>(i)].derivative(f.var_offset + j);
      for (int k = 0; k < n; ++k)
        s += f.christoffel[static_cast<std::size_t>(i)](j, k) * v[static_cast<std::size_t>(k)];
      d(i, j) = s;
    }
  return d;
}

}  // namespace detail

// A field sampled against the geometry of one chart point.
struct FieldAtPoint {
  const SurfaceGeometry& geometry;
  JetVector jets;

  FieldAtPoint(const SurfaceGeometry& geo, const TangentField& v)
      : geometry(geo), jets(detail::field_jets(v, geo.frame, geo.point)) {}

  Eigen::VectorXd value() const { return values(jets); }
};

// nabla_j V^i, returned as a matrix indexed (i, j).
inline Eigen::MatrixXd covariant_derivative(const FieldAtPoint& v) {
  return detail::covariant_jets(v.geometry.frame, v.jets).values();
}

inline Eigen::VectorXd bochner(const FieldAtPoint& v) {
  const SurfaceFrame& f = v.geometry.frame;
  const int n = f.n;
  const JetMatrix dv = detail::covariant_jets(f, v.jets);
  const Eigen::MatrixXd ginv = f.inverse_metric.values();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double second = dv(i, k).derivative(f.var_offset + j).value();
        for (int l = 0; l < n; ++l) {
          second += f.christoffel[static_cast<std::size_t>(i)](j, l).value() * dv(l, k).value();
          second -= f.christoffel[static_cast<std::size_t>(l)](j, k).value() * dv(i, l).value();
        }
        out(i) += ginv(j, k) * second;
      }
  return out;
}

// -(d delta + delta d) V^flat, index raised.
inline Eigen::VectorXd hodge(const FieldAtPoint& v) {
  const SurfaceFrame& f = v.geometry.frame;
  const int n = f.n;
  const int off = f.var_offset;
  auto G = [&](int i, int j, int k) -> const Jet& {
    return f.christoffel[static_cast<std::size_t>(i)](j, k);
  };

  JetVector omega(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Jet s;
    for (int j = 0; j < n; ++j) s += f.metric(i, j) * v.jets[static_cast<std::size_t>(j)];
    omega[static_cast<std::size_t>(i)] = s;
  }

  // delta omega = -g^ij (d_i omega_j - Gamma^k_ij omega_k)
  Jet codiff;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet nabla = omega[static_cast<std::size_t>(j)].derivative(off + i);
      for (int k = 0; k < n; ++k) nabla -= G(k, i, j) * omega[static_cast<std::size_t>(k)];
      codiff -= f.inverse_metric(i, j) * nabla;
    }

  // (d omega)_ij = d_i omega_j - d_j omega_i
  JetMatrix dw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dw(i, j) = omega[static_cast<std::size_t>(j)].derivative(off + i) -
                 omega[static_cast<std::size_t>(i)].derivative(off + j);

  const Eigen::MatrixXd ginv = f.inverse_metric.values();
  Eigen::VectorXd form(n);
  for (int j = 0; j < n; ++j) {
    // (d delta omega)_j
    double value = codiff.derivative(off + j).value();
    // (delta d omega)_j = -g^ik nabla_i (d omega)_kj
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double nabla = dw(k, j).derivative(off + i).value();
        for (int l = 0; l < n; ++l) {
          nabla -= G(l, i, k).value() * dw(l, j).value();
          nabla -= G(l, i, j).value() * dw(k, l).value();
        }
        value -= ginv(i, k) * nabla;
      }
    form(j) = -value;
  }
  return ginv * form;
}

inline Eigen::VectorXd ricci_action(const FieldAtPoint& v) {
  return v.geometry.intrinsic.ricci_mixed * v.value();
}

inline Eigen::VectorXd deformation(const FieldAtPoint& v) {
  return bochner(v) + ricci_action(v);
}

// Delta_Def - 2 alpha Ric - 4 alpha (1 - alpha) S^2.
inline Eigen::VectorXd alpha_operator(const FieldAtPoint& v, double alpha) {
  return deformation(v) - 2.0 * alpha * ricci_action(v) -
         4.0 * alpha * (1.0 - alpha) * (v.geometry.extrinsic.shape_squared * v.value());
}

// All intrinsic operators at one point, each computed once.
struct IntrinsicOperators {
  Eigen::VectorXd field;
  Eigen::VectorXd bochner;
  Eigen::VectorXd hodge;
  Eigen::VectorXd ricci;          // Ric V
  Eigen::VectorXd shape_squared;  // S^2 V
  Eigen::VectorXd deformation() const { return bochner + ricci; }
  Eigen::VectorXd alpha(double a) const {
    return deformation() - 2.0 * a * ricci - 4.0 * a * (1.0 - a) * shape_squared;
  }
};

inline IntrinsicOperators intrinsic_operators(const FieldAtPoint& v) {
  IntrinsicOperators ops;
  ops.field = v.value();
  ops.bochner = bochner(v);
  ops.hodge = hodge(v);
  ops.ricci = ricci_action(v);
  ops.shape_squared = v.geometry.extrinsic.shape_squared * ops.field;
  return ops;
}

// Single-shot forms taking the chart and point directly.
inline Eigen::VectorXd bochner(const TangentField& v, const Chart& chart,
                               std::span<const double> u) {
  const SurfaceGeometry geo = surface_geometry(chart, u);
  return bochner(FieldAtPoint(geo, v));
}

inline Eigen::VectorXd hodge(const TangentField& v, const Chart& chart,
                             std::span<const double> u) {
  const SurfaceGeometry geo = surface_geometry(chart, u);
  return hodge(FieldAtPoint(geo, v));
}

inline Eigen::VectorXd deformation(const TangentField& v, const Chart& chart,
                                   std::span<const double> u) {
  const SurfaceGeometry geo = surface_geometry(chart, u);
  return deformation(FieldAtPoint(geo, v));
}

inline Eigen::VectorXd alpha_operator(const TangentField& v, const Chart& chart,
                                      std::span<const double> u, double alpha) {
  const SurfaceGeometry geo = surface_geometry(chart, u);
  return alpha_operator(FieldAtPoint(geo, v), alpha);
}

}  // namespace thinshell
