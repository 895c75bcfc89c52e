#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thinshell/catalog.hpp"
#include "thinshell/oracle.hpp"

using namespace thinshell;

namespace {

Chart plane() { return make_custom({"u1", "u2", "0"}, {{-1, 1}, {-1, 1}}); }

std::vector<double> sample(const Chart& c, std::mt19937_64& rng) {
  std::vector<double> u;
  for (const auto& iv : c.interior(0.1))
    u.push_back(std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng));
  return u;
}

}  // namespace

TEST(ClosestPoint, PointOnSurface) {
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0);
  const std::vector<double> u{0.8, 2.2};
  const std::vector<double> seed{0.85, 2.1};
  const auto cp = closest_point(e, e.position(u), seed);
  EXPECT_NEAR(cp.r, 0.0, 1e-12);
  EXPECT_NEAR(cp.u[0], u[0], 1e-10);
  EXPECT_NEAR(cp.u[1], u[1], 1e-10);
  EXPECT_LE(cp.iterations, 50);
}

TEST(ClosestPoint, SphereNorthPoleDirection) {
  // Off the chart pole the foot point is recovered along the outward normal.
  const Chart s = make_sphere(1.0);
  const std::vector<double> u{0.6, 1.0};
  const Eigen::VectorXd p = 1.1 * s.position(u);
  const auto cp = closest_point(s, p, std::vector<double>{0.5, 1.1});
  EXPECT_NEAR(cp.r, 0.1, 1e-12);
  EXPECT_NEAR(cp.u[0], 0.6, 1e-10);
  EXPECT_NEAR(cp.u[1], 1.0, 1e-10);
}

TEST(ClosestPoint, EllipsoidReconstruction) {
  const Chart e = make_ellipsoid(1.0, 1.3, 2.0);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto u = sample(e, rng);
    const SurfaceGeometry s = surface_geometry(e, u);
    const double r = std::uniform_real_distribution<double>(-0.3, 0.3)(rng) *
                     focal_radius(s.extrinsic, 10.0);
    const Eigen::VectorXd p = e.position(u) + r * s.extrinsic.normal;
    std::vector<double> seed = u;
    seed[0] += 0.02;
    seed[1] -= 0.02;
    const auto cp = closest_point(e, p, seed);
    const SurfaceGeometry f = surface_geometry(e, cp.u);
    EXPECT_LT((p - (e.position(cp.u) + cp.r * f.extrinsic.normal)).norm(), 1e-10);
    EXPECT_NEAR(cp.r, r, 1e-10);
  }
}

TEST(ClosestPoint, OutsideTube) {
  const Chart s = make_sphere(1.0);
  const std::vector<double> u{1.0, 1.0};
  EXPECT_THROW(closest_point(s, 3.0 * s.position(u), u), OutsideTube);
}

TEST(CartesianLaplacian, PlanePolynomialFieldIsExact) {
  const TangentField v({"u1^2 + u2", "u1*u2"}, 2);
  const std::vector<double> u{0.2, -0.3};
  for (const auto& p : {BoundaryProfile::slip(), BoundaryProfile::hodge()}) {
    const auto lap = cartesian_laplacian({v, p}, plane(), u, 1e-2);
    EXPECT_NEAR(lap.value(0), 2.0, 1e-8);
    EXPECT_NEAR(lap.value(1), 0.0, 1e-8);
  }
}

TEST(CartesianLaplacian, UnitSphereSlip) {
  const ShellField sf{random_field(2, 3), BoundaryProfile::slip()};
  const std::vector<double> u{1.0, 0.5};
  const Eigen::VectorXd want = ambient_bochner_tangential(ShellGeometry(make_sphere(1.0), u), sf);
  const Eigen::VectorXd got = cartesian_laplacian(sf, make_sphere(1.0), u, 1e-3).at_step;
  EXPECT_LT(detail::relative_gap(got, want), 1e-5);
}

TEST(CartesianLaplacian, EllipsoidAlphaHalf) {
  const ShellField sf{random_field(2, 7), BoundaryProfile::alpha(0.5)};
  const std::vector<double> u{0.9, 2.4};
  const auto c = compare_with_shell(sf, make_ellipsoid(1.0, 1.3, 2.0), u);
  EXPECT_LT(c.error, 1e-4);
}

TEST(CartesianLaplacian, AgreesWithShellAndConvergesAtSecondOrder) {
  std::mt19937_64 rng(11);
  const std::vector<Chart> charts{make_sphere(2.5), make_torus(2.0, 0.7),
                                  make_graph("sin(u1)*cos(u2)"), random_custom_chart(1)};
  for (const Chart& c : charts)
    for (const auto& p : {BoundaryProfile::slip(), BoundaryProfile::hodge(),
                          BoundaryProfile::alpha(0.3)}) {
      const auto u = sample(c, rng);
      const auto cmp = compare_with_shell({random_field(2, 13), p}, c, u);
      EXPECT_LT(cmp.error, 1e-4) << c.name() << " " << p.label();
      ASSERT_TRUE(cmp.order.has_value());
      EXPECT_GT(*cmp.order, 1.8) << c.name() << " " << p.label();
      EXPECT_LT(*cmp.order, 2.2) << c.name() << " " << p.label();
    }
}
