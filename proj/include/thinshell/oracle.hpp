#pragma once

// Brute-force cross-check of the ambient Laplacian. In flat space the
// Bochner Laplacian acts on Cartesian components one by one, so a plain
// second-difference stencil around Y(0, u) needs no Fermi machinery beyond
// locating each stencil point in (r, u) coordinates.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thinshell/errors.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/shell.hpp"

namespace thinshell {

struct ClosestPointResult {
  std::vector<double> u;
  double r = 0.0;
  double residual = 0.0;  // |grad_u |p - X(u)|^2 / 2|
  int iterations = 0;
};

inline constexpr int kClosestPointMaxIterations = 50;

inline ClosestPointResult closest_point(const Chart& chart, const Eigen::VectorXd& p,
                                        std::span<const double> seed) {
  const int n = chart.dim();
  const int m = n + 1;
  std::vector<double> u(seed.begin(), seed.end());
  for (int it = 1; it <= kClosestPointMaxIterations; ++it) {
    const JetVector x = chart.embed(std::span<const double>(u), 2);
    Eigen::VectorXd d(m);
    for (int a = 0; a < m; ++a) d(a) = p(a) - x[static_cast<std::size_t>(a)].value();
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    for (int i = 0; i < n; ++i) {
      double gi = 0.0;
      for (int a = 0; a < m; ++a) gi -= d(a) * x[static_cast<std::size_t>(a)].derivative(i).value();
      grad(i) = gi;
      for (int j = 0; j < n; ++j) {
        double h = 0.0;
        for (int a = 0; a < m; ++a) {
          const Jet xi = x[static_cast<std::size_t>(a)].derivative(i);
          h += xi.value() * x[static_cast<std::size_t>(a)].derivative(j).value();
          h -= d(a) * xi.derivative(j).value();
        }
        hess(i, j) = h;
      }
    }
    const Eigen::VectorXd step = hess.ldlt().solve(-grad);
    if (!step.allFinite())
      throw NoConvergence("closest point: singular Newton system at iteration " +
                          std::to_string(it));
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      u[static_cast<std::size_t>(i)] += step(i);
      scale = std::max(scale, std::abs(u[static_cast<std::size_t>(i)]));
    }
    if (step.norm() < 1e-12 * scale) {
      const SurfaceGeometry s = surface_geometry(chart, u);
      const Eigen::VectorXd x0 = chart.position(u);
      ClosestPointResult res;
      res.u = u;
      res.r = (p - x0).dot(s.extrinsic.normal);
      res.iterations = it;
      Eigen::VectorXd g(n);
      for (int i = 0; i < n; ++i) g(i) = -(p - x0).dot(values(s.frame.tangents[static_cast<std::size_t>(i)]));
      res.residual = g.norm();
      const double focal = focal_radius(s.extrinsic, 1e300);
      if (std::abs(res.r) >= focal)
        throw OutsideTube("point at distance " + std::to_string(res.r) +
                          " lies outside the focal radius " + std::to_string(focal));
      return res;
    }
  }
  throw NoConvergence("closest point: no convergence in " +
                      std::to_string(kClosestPointMaxIterations) + " Newton steps");
}

namespace detail {

// Cartesian components of the extension at the ambient point p.
inline Eigen::VectorXd cartesian_extension(const ShellField& sf, const Chart& chart,
                                           const Eigen::VectorXd& p,
                                           std::span<const double> seed) {
  const ClosestPointResult cp = closest_point(chart, p, seed);
  const int n = chart.dim();
  const SurfaceFrame f = surface_frame(chart.embed(std::span<const double>(cp.u), 2), n);
  const Eigen::MatrixXd s = f.shape.values();
  const Eigen::VectorXd v = sf.field.evaluate(std::span<const double>(cp.u));
  const RadialProfile prof = radial_profile(sf.profile, s, v);
  const Eigen::VectorXd u = v + cp.r * prof.first + 0.5 * cp.r * cp.r * prof.second;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a <= n; ++a) {
      const double dy = f.tangents[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].value() +
                        cp.r * f.normal[static_cast<std::size_t>(a)].derivative(i).value();
      w(a) += u(i) * dy;
    }
  return w;
}

}  // namespace detail

struct CartesianLaplacian {
  Eigen::VectorXd value;      // Richardson combination, chart components
  Eigen::VectorXd at_step;    // plain stencil at h
  Eigen::VectorXd at_half;    // plain stencil at h/2
  double step = 0.0;
};

// step <= 0 selects h = 1e-3 * focal radius.
inline CartesianLaplacian cartesian_laplacian(const ShellField& sf, const Chart& chart,
                                              std::span<const double> u, double step = 0.0) {
  const SurfaceGeometry s = surface_geometry(chart, u);
  const int n = chart.dim();
  const int m = n + 1;
  const double h = step > 0.0 ? step : 1e-3 * focal_radius(s.extrinsic, length_scale(chart, u));
  const Eigen::VectorXd y0 = chart.position(u);
  const Eigen::VectorXd w0 = detail::cartesian_extension(sf, chart, y0, u);

  auto stencil = [&](double hh) {
    Eigen::VectorXd lap = Eigen::VectorXd::Zero(m);
    for (int a = 0; a < m; ++a) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e(a) = hh;
      lap += (detail::cartesian_extension(sf, chart, y0 + e, u) - 2.0 * w0 +
              detail::cartesian_extension(sf, chart, y0 - e, u)) /
             (hh * hh);
    }
    // Tangential projection: L^i = g^ij <L, d_j X>.
    Eigen::VectorXd proj(n);
    for (int j = 0; j < n; ++j) proj(j) = lap.dot(values(s.frame.tangents[static_cast<std::size_t>(j)]));
    return Eigen::VectorXd(s.intrinsic.inverse_metric * proj);
  };

  CartesianLaplacian out;
  out.step = h;
  out.at_step = stencil(h);
  out.at_half = stencil(0.5 * h);
  out.value = (4.0 * out.at_half - out.at_step) / 3.0;
  return out;
}

struct OracleComparison {
  double error = 0.0;          // Richardson value vs shell
  double error_step = 0.0;     // plain stencil at h vs shell
  double error_half = 0.0;     // plain stencil at h/2 vs shell
  std::optional<double> order;  // log2(error_step / error_half)
  double step = 0.0;
};

// Relative agreement between the stencil and the shell computation.
// Order estimates use a coarser step (default 0.01 * focal) so that
// truncation, not roundoff, dominates the plain stencil error; much coarser
// steps are pre-asymptotic near chart poles.
inline OracleComparison compare_with_shell(const ShellField& sf, const Chart& chart,
                                           std::span<const double> u, double step = 0.0,
                                           double order_step = 0.0) {
  const Eigen::VectorXd want = ambient_bochner_tangential(ShellGeometry(chart, u), sf);
  auto rel = [&](const Eigen::VectorXd& got) { return detail::relative_gap(got, want); };
  const CartesianLaplacian fine = cartesian_laplacian(sf, chart, u, step);
  OracleComparison c;
  c.error = rel(fine.value);
  c.step = fine.step;
  const double hs = order_step > 0.0
                        ? order_step
                        : 0.01 * focal_radius(extrinsic_at(chart, u), length_scale(chart, u));
  const CartesianLaplacian coarse = cartesian_laplacian(sf, chart, u, hs);
  c.error_step = rel(coarse.at_step);
  c.error_half = rel(coarse.at_half);
  if (c.error_half > 1e-13 && c.error_step > 1e-13) c.order = std::log2(c.error_step / c.error_half);
  return c;
}

}  // namespace thinshell
