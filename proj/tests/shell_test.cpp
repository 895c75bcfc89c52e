#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thinshell/catalog.hpp"
#include "thinshell/fields.hpp"
#include "thinshell/shell.hpp"

using namespace thinshell;
using test_support::rel_err;

namespace {

Chart plane() { return make_custom({"u1", "u2", "0"}, {{-1, 1}, {-1, 1}}); }

std::vector<Chart> surfaces() {
  return {make_sphere(1.0),       make_sphere(2.5),
          make_ellipsoid(1.0, 1.3, 2.0), make_torus(2.0, 0.7),
          make_graph("sin(u1)*cos(u2)"), random_custom_chart(1),
          random_custom_chart(2)};
}

std::vector<std::vector<double>> points(const Chart& c, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts;
  for (int k = 0; k < count; ++k) {
    std::vector<double> u;
    for (const auto& iv : c.interior(0.05))
      u.push_back(std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng));
    pts.push_back(u);
  }
  return pts;
}

double vec_rel(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / (1.0 + want.cwiseAbs().maxCoeff());
}

const std::vector<double> kU{1.1, 0.4};

}  // namespace

TEST(Profile, AlphaEndpointsMatchSlipAndHodge) {
  EXPECT_EQ(BoundaryProfile::alpha(0).first_coefficient(), BoundaryProfile::slip().first_coefficient());
  EXPECT_EQ(BoundaryProfile::alpha(0).second_coefficient(), BoundaryProfile::slip().second_coefficient());
  EXPECT_EQ(BoundaryProfile::alpha(1).first_coefficient(), BoundaryProfile::hodge().first_coefficient());
  EXPECT_EQ(BoundaryProfile::alpha(1).second_coefficient(), BoundaryProfile::hodge().second_coefficient());
  EXPECT_EQ(BoundaryProfile::hodge().first_coefficient(), 2.0);
  EXPECT_EQ(BoundaryProfile::hodge().second_coefficient(), 6.0);
}

TEST(Profile, ParseAndLabel) {
  EXPECT_EQ(BoundaryProfile::parse("slip").label(), "slip");
  EXPECT_EQ(BoundaryProfile::parse("hodge").label(), "hodge");
  EXPECT_DOUBLE_EQ(BoundaryProfile::parse("alpha:0.25").alpha(), 0.25);
  EXPECT_THROW(BoundaryProfile::parse("alpha:x"), ConfigError);
  EXPECT_THROW(BoundaryProfile::parse("noslip"), ConfigError);
}

TEST(ShellMetric, FermiBlockAndSurfaceRestriction) {
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 5, 3)) {
      const ShellGeometry shell(c, u);
      const Eigen::MatrixXd gb = shell.metric().values();
      EXPECT_NEAR(gb(0, 0), 1.0, 1e-12) << c.name();
      for (int i = 1; i <= c.dim(); ++i) EXPECT_NEAR(gb(0, i), 0.0, 1e-12);
      EXPECT_LT(rel_err(Eigen::MatrixXd(gb.bottomRightCorner(c.dim(), c.dim())),
                        shell.surface().intrinsic.metric), 1e-12);
      // Block structure holds identically, so its r-derivatives vanish too.
      for (int v = 0; v <= c.dim(); ++v)
        EXPECT_NEAR(shell.metric()(0, 0).derivative(v).value(), 0.0, 1e-12);
    }
}

TEST(ShellMetric, OffsetSurfaceConsistency) {
  // The tangential block at r agrees with the metric of the chart X + rN.
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 3, 5)) {
      const double r = 0.2 * focal_radius(extrinsic_at(c, u), 10.0);
      const ShellGeometry shell(c, u, r);
      const Eigen::MatrixXd gr = offset_frame(c, u, r).metric.values();
      const Eigen::MatrixXd gb = shell.metric().values().bottomRightCorner(c.dim(), c.dim());
      EXPECT_LT(rel_err(gb, gr), 1e-12) << c.name();
    }
}

TEST(ShellMetric, BeyondFocalRadiusThrows) {
  EXPECT_THROW(ShellGeometry(make_sphere(1.0), kU, 1.5), FocalDegeneracy);
  EXPECT_THROW(metric_expansion_check(make_sphere(1.0), kU, 1.0), FocalDegeneracy);
}

TEST(MetricExpansion, PlaneIsExact) {
  const auto c = metric_expansion_check(plane(), std::vector<double>{0.1, -0.3}, 0.5);
  EXPECT_EQ(c.residual, 0.0);
  EXPECT_FALSE(c.order.has_value());
}

TEST(MetricExpansion, SphereOffsetMetric) {
  // Outward normal: g(r) = (1 + r)^2 g(0) on the unit sphere.
  const Chart s = make_sphere(1.0);
  const double r = 0.3;
  const Eigen::MatrixXd gr = offset_frame(s, kU, r).metric.values();
  EXPECT_LT(rel_err(gr, (1 + r) * (1 + r) * extrinsic_at(s, kU).second_form * -1.0), 1e-12);
  const auto c = metric_expansion_check(s, kU, r);
  EXPECT_LT(c.residual, 1e-13);
}

TEST(MetricExpansion, QuadraticExpansionIsExactInFlatSpace) {
  // g_ij(r) is a polynomial of degree two in r, so no O(r^3) remainder exists.
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 3, 7)) {
      const double r = 0.3 * focal_radius(extrinsic_at(c, u), 10.0);
      const auto chk = metric_expansion_check(c, u, r);
      EXPECT_LT(chk.residual, 1e-11) << c.name();
      EXPECT_LT(chk.residual_half, 1e-11) << c.name();
    }
}

TEST(AmbientChristoffel, PlaneHasOnlyZeros) {
  const auto t = ambient_christoffel(plane(), std::vector<double>{0.2, 0.1});
  EXPECT_LT(t.normal_tangential.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(t.tangential_normal.cwiseAbs().maxCoeff(), 1e-14);
  for (const auto& g : t.tangential) EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AmbientChristoffel, UnitSphereMixedBlock) {
  // Gamma^i_rj = -S^i_j = +delta with the outward normal.
  const auto t = ambient_christoffel(make_sphere(1.0), kU);
  EXPECT_LT(rel_err(t.tangential_normal, Eigen::MatrixXd::Identity(2, 2)), 1e-12);
}

TEST(AmbientChristoffel, MatchesSurfaceTable) {
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 5, 11)) {
      const ShellGeometry shell(c, u);
      const auto t = ambient_christoffel(shell);
      const auto& s = shell.surface();
      EXPECT_LT(rel_err(t.normal_tangential, s.extrinsic.second_form), 1e-9) << c.name();
      EXPECT_LT(rel_err(t.tangential_normal, Eigen::MatrixXd(-s.extrinsic.shape)), 1e-9);
      for (int i = 0; i < c.dim(); ++i)
        EXPECT_LT(rel_err(t.tangential[static_cast<std::size_t>(i)],
                          s.intrinsic.christoffel[static_cast<std::size_t>(i)]), 1e-9);
      EXPECT_NEAR(t.rr_r, 0.0, 1e-12);
      EXPECT_LT(t.rr_tangential.cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT(t.ri_r.cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(RadialTrace, ProfileExamples) {
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0);
  const TangentField v = random_field(2, 4);
  const ShellGeometry shell(e, kU);
  const auto& ex = shell.surface().extrinsic;
  const Eigen::VectorXd val = v.evaluate(std::span<const double>(kU));
  EXPECT_EQ(radial_trace(shell, {v, BoundaryProfile::slip()}).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(vec_rel(radial_trace(shell, {v, BoundaryProfile::hodge()}), 2.0 * ex.shape_squared * val),
            1e-12);
  for (double a : {0.25, 0.5, 0.75})
    EXPECT_LT(vec_rel(radial_trace(shell, {v, BoundaryProfile::alpha(a)}),
                      2.0 * a * (2.0 * a - 1.0) * ex.shape_squared * val),
              1e-12);
}

TEST(TangentialTrace, PlaneReducesToBochner) {
  const TangentField v({"sin(u1)*u2", "u1^2 - cos(u2)"}, 2);
  const std::vector<double> u{0.3, -0.4};
  const ShellGeometry shell(plane(), u);
  const Eigen::VectorXd want(Eigen::Vector2d(-std::sin(0.3) * -0.4, 2.0 + std::cos(-0.4)));
  for (const auto& p : {BoundaryProfile::slip(), BoundaryProfile::hodge()})
    EXPECT_LT(vec_rel(tangential_trace(shell, {v, p}), want), 1e-12);
}

TEST(TangentialTrace, UnitSphereSlipIsDeformation) {
  const TangentField v = random_field(2, 9);
  const ShellGeometry shell(make_sphere(1.0), kU);
  const Eigen::VectorXd t = tangential_trace(shell, {v, BoundaryProfile::slip()});
  const FieldAtPoint fv(shell.surface(), v);
  EXPECT_LT(vec_rel(t, bochner(fv) + fv.value()), 1e-10);
  EXPECT_LT(vec_rel(t, deformation(fv)), 1e-10);
}

TEST(Traces, ClosedFormAgreesWithDirectEverywhere) {
  // radial_trace / tangential_trace throw on disagreement beyond 1e-6.
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 4, 13))
      for (const auto& p : {BoundaryProfile::slip(), BoundaryProfile::hodge(),
                            BoundaryProfile::alpha(0.3)}) {
        const ShellGeometry shell(c, u);
        const ShellField sf{random_field(2, 17), p};
        EXPECT_NO_THROW(radial_trace(shell, sf)) << c.name() << " " << p.label();
        EXPECT_NO_THROW(tangential_trace(shell, sf)) << c.name() << " " << p.label();
        const TraceSplit d = direct_traces(shell, sf);
        EXPECT_LT(vec_rel(d.radial + d.tangential, ambient_bochner_tangential(shell, sf)), 1e-9);
      }
}

TEST(FRad, Examples) {
  const TangentField v = random_field(2, 21);
  const Eigen::VectorXd val = v.evaluate(std::span<const double>(kU));
  for (const Chart& c : surfaces()) {
    const auto u = points(c, 1, 2)[0];
    EXPECT_EQ(f_rad(BoundaryProfile::slip(), c, u, v).cwiseAbs().maxCoeff(), 0.0);
  }
  const Chart s = make_sphere(1.0);
  EXPECT_LT(vec_rel(f_rad(BoundaryProfile::hodge(), s, kU, v), -2.0 * val), 1e-12);
  EXPECT_LT(vec_rel(f_rad(BoundaryProfile::alpha(0.5), s, kU, v), -2.0 * val), 1e-12);
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0);
  EXPECT_GT((f_rad(BoundaryProfile::alpha(0.5), e, kU, v) - f_rad(BoundaryProfile::hodge(), e, kU, v))
                .norm(),
            1e-4);
}

TEST(FRad, ClosedFormsThroughGauss) {
  // Hodge: -2 Ric V; Alpha: -2 alpha Ric V - 4 alpha (1 - alpha) S^2 V.
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 3, 23)) {
      const SurfaceGeometry s = surface_geometry(c, u);
      const TangentField v = random_field(2, 29);
      const Eigen::VectorXd val = v.evaluate(std::span<const double>(u));
      const Eigen::MatrixXd ric = s.intrinsic.ricci_mixed;
      EXPECT_LT(vec_rel(f_rad(BoundaryProfile::hodge(), s, v), -2.0 * ric * val), 1e-9) << c.name();
      for (double a : {0.2, 0.5, 0.9})
        EXPECT_LT(vec_rel(f_rad(BoundaryProfile::alpha(a), s, v),
                          -2.0 * a * ric * val - 4.0 * a * (1 - a) * s.extrinsic.shape_squared * val),
                  1e-9);
    }
}

TEST(Theorems, DecompositionAndUniversality) {
  for (const Chart& c : surfaces())
    for (const auto& u : points(c, 4, 31))
      for (std::uint64_t seed : {1u, 2u}) {
        const ShellGeometry shell(c, u);
        const TangentField v = random_field(2, seed);
        const FieldAtPoint fv(shell.surface(), v);
        const IntrinsicOperators ops = intrinsic_operators(fv);
        EXPECT_LT(vec_rel(ambient_bochner_tangential(shell, {v, BoundaryProfile::slip()}),
                          ops.deformation()), 1e-7) << c.name();
        EXPECT_LT(vec_rel(ambient_bochner_tangential(shell, {v, BoundaryProfile::hodge()}),
                          ops.hodge), 1e-7) << c.name();
        for (int k = 0; k <= 10; ++k) {
          const double a = 0.1 * k;
          const BoundaryProfile p = BoundaryProfile::alpha(a);
          const Eigen::VectorXd amb = ambient_bochner_tangential(shell, {v, p});
          EXPECT_LT(vec_rel(amb, ops.alpha(a)), 1e-7) << c.name() << " alpha " << a;
          EXPECT_LT(vec_rel(amb, ops.deformation() + f_rad(p, shell.surface(), v)), 1e-7);
        }
      }
}

TEST(Theorems, OrientationIndependent) {
  // Swapping chart variables flips N and S; the identities must survive.
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0).with_swapped_variables(0, 1);
  const TangentField v = random_field(2, 5);
  for (const auto& u : points(e, 5, 37)) {
    const ShellGeometry shell(e, u);
    const IntrinsicOperators ops = intrinsic_operators(FieldAtPoint(shell.surface(), v));
    EXPECT_LT(vec_rel(ambient_bochner_tangential(shell, {v, BoundaryProfile::slip()}),
                      ops.deformation()), 1e-7);
    EXPECT_LT(vec_rel(ambient_bochner_tangential(shell, {v, BoundaryProfile::hodge()}),
                      ops.hodge), 1e-7);
    EXPECT_LT(vec_rel(ambient_bochner_tangential(shell, {v, BoundaryProfile::alpha(0.4)}),
                      ops.alpha(0.4)), 1e-7);
  }
}

TEST(Theorems, ExtrinsicCoupling) {
  const TangentField v = random_field(2, 41);
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0);
  const std::vector<double> u{0.9, 0.7};
  const auto ops = intrinsic_operators(FieldAtPoint(surface_geometry(e, u), v));
  EXPECT_GT((ops.alpha(0.5) - ops.hodge).norm(), 1e-4 * ops.field.norm());
  const auto ops_s = intrinsic_operators(FieldAtPoint(surface_geometry(make_sphere(1.0), u), v));
  EXPECT_LT((ops_s.alpha(0.5) - ops_s.hodge).norm(), 1e-10);
}

TEST(Deformation, NormalTangentialComponent) {
  const TangentField v = random_field(2, 43);
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0);
  for (const auto& u : points(e, 5, 47)) {
    const ShellGeometry shell(e, u);
    EXPECT_LT(deformation_normal_tangential(shell, {v, BoundaryProfile::slip()}).cwiseAbs().maxCoeff(),
              1e-10);
  }
  const ShellGeometry sphere(make_sphere(1.0), kU);
  const Eigen::VectorXd d = deformation_normal_tangential(sphere, {v, BoundaryProfile::hodge()});
  EXPECT_GT(d.norm(), 1e-6);
  // (Def U)_ri = g_ij A^j / 2 with A = 2 S V = -2 V.
  const Eigen::VectorXd flat = sphere.surface().intrinsic.metric * v.evaluate(std::span<const double>(kU));
  EXPECT_LT(vec_rel(d, -flat), 1e-10);
  const ShellGeometry p(plane(), std::vector<double>{0.1, 0.2});
  EXPECT_LT(deformation_normal_tangential(p, {v, BoundaryProfile::hodge()}).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RadialConstancy, ProfileExamples) {
  const TangentField v = random_field(2, 53);
  const Chart t = make_torus(2.0, 0.7);
  for (const auto& u : points(t, 5, 59))
    EXPECT_LT(covariant_radial_constancy(ShellGeometry(t, u), {v, BoundaryProfile::hodge()})
                  .cwiseAbs().maxCoeff(), 1e-10);
  const ShellGeometry s(make_sphere(1.0), kU);
  const Eigen::VectorXd flat = s.surface().intrinsic.metric * v.evaluate(std::span<const double>(kU));
  // d_r g = -2 II = +2 g with the outward normal.
  EXPECT_LT(vec_rel(covariant_radial_constancy(s, {v, BoundaryProfile::slip()}), 2.0 * flat), 1e-12);
  for (double a : {0.25, 0.5, 0.75})
    EXPECT_LT(vec_rel(covariant_radial_constancy(s, {v, BoundaryProfile::alpha(a)}),
                      (2.0 - 2.0 * a) * flat), 1e-12);
}
