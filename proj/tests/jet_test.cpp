#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thinshell/expr.hpp"
#include "thinshell/jet.hpp"

using namespace thinshell;

TEST(Jet, SquareDerivative) {
  const Jet x = seed_variable(0, 3.0, 1);
  const Jet y = x * x;
  EXPECT_DOUBLE_EQ(y.value(), 9.0);
  EXPECT_DOUBLE_EQ(y.partial({0}), 6.0);
  EXPECT_DOUBLE_EQ(y.partial({0, 0}), 2.0);
  EXPECT_DOUBLE_EQ(y.partial({0, 0, 0}), 0.0);
}

TEST(Jet, SineTaylorSeries) {
  const Jet s = sin(seed_variable(0, 0.0, 1));
  EXPECT_DOUBLE_EQ(s.partial({0, 0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(s.partial({0, 0, 0}), -1.0);
  EXPECT_DOUBLE_EQ(s.partial({0}), 1.0);
}

TEST(Jet, BilinearMixedPartials) {
  const Jet u = seed_variable(0, 0.7, 2), v = seed_variable(1, -1.3, 2);
  const Jet p = u * v;
  EXPECT_DOUBLE_EQ(p.partial({0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(p.partial({1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(p.partial({0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(p.partial({0, 0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(p.partial({0, 1, 1, 0}), 0.0);
}

TEST(Jet, SeedVariable) {
  const Jet s = seed_variable(0, 2.5, 3);
  EXPECT_DOUBLE_EQ(s.value(), 2.5);
  EXPECT_DOUBLE_EQ(s.partial({0}), 1.0);
  EXPECT_DOUBLE_EQ(s.partial({1}), 0.0);
  EXPECT_DOUBLE_EQ(s.partial({2}), 0.0);
  EXPECT_DOUBLE_EQ(s.partial({0, 0}), 0.0);
  EXPECT_THROW(seed_variable(3, 1.0, 3), IndexOutOfRange);
}

TEST(Jet, ExpHasUnitPureDerivatives) {
  const Jet e = exp(seed_variable(0, 0.0, 2));
  EXPECT_DOUBLE_EQ(e.value(), 1.0);
  EXPECT_DOUBLE_EQ(e.partial({0}), 1.0);
  EXPECT_DOUBLE_EQ(e.partial({0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(e.partial({0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(e.partial({0, 0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(e.partial({1}), 0.0);
}

TEST(Jet, DomainAndDivisionErrors) {
  EXPECT_THROW(sqrt(seed_variable(0, -1.0, 1)), DomainError);
  EXPECT_THROW(log(seed_variable(0, 0.0, 1)), DomainError);
  EXPECT_THROW(pow(seed_variable(0, -2.0, 1), 0.5), DomainError);
  EXPECT_THROW(seed_variable(0, 1.0, 1) / Jet::constant(0.0, 1), DivisionByZero);
  EXPECT_THROW(1.0 / (seed_variable(0, 0.0, 1) * 1e-301), DivisionByZero);
}

TEST(Jet, IntegerPowerOfNegativeBase) {
  const Jet x = seed_variable(0, -2.0, 1);
  const Jet c = pow(x, 3.0);
  EXPECT_DOUBLE_EQ(c.value(), -8.0);
  EXPECT_DOUBLE_EQ(c.partial({0}), 12.0);
  EXPECT_DOUBLE_EQ(c.partial({0, 0}), -12.0);
  const Jet inv = pow(x, -1.0);
  EXPECT_DOUBLE_EQ(inv.partial({0}), -0.25);
}

TEST(Jet, DifferentiationLowersOrderAndCommutes) {
  const Jet u = seed_variable(0, 0.3, 2), v = seed_variable(1, 0.8, 2);
  const Jet f = sin(u * v) * exp(v);
  const Jet a = f.derivative(0).derivative(1);
  const Jet b = f.derivative(1).derivative(0);
  EXPECT_EQ(a.order(), 2);
  for (int m = 0; m < a.space().size(2); ++m)
    EXPECT_EQ(a.coefficient(m), b.coefficient(m));
  EXPECT_DOUBLE_EQ(a.partial({0, 1}), f.partial({0, 1, 0, 1}));
  EXPECT_THROW(a.partial({0, 0, 0}), IndexOutOfRange);
}

TEST(Jet, SumsCommuteExactly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Jet u = seed_variable(0, d(rng), 2), v = seed_variable(1, d(rng), 2);
    const Jet a = sin(u) * exp(v), b = cos(u * v) + u * u * u;
    const Jet s1 = a + b, s2 = b + a;
    for (int m = 0; m < s1.space().size(4); ++m)
      EXPECT_EQ(s1.coefficient(m), s2.coefficient(m));
  }
}

// Leibniz rule at every order, checked against central finite differences of
// plain double evaluation over random composite expressions.
TEST(Jet, PartialsMatchFiniteDifferences) {
  std::mt19937_64 rng(20240611);
  test_support::ExpressionGenerator gen(3, 99);
  const auto vars = chart_variables(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = parse(gen.next(), vars);
    const auto x = test_support::random_point(rng, 3, -1.5, 1.5);
    std::vector<Jet> seeds;
    for (int i = 0; i < 3; ++i) seeds.push_back(seed_variable(i, x[static_cast<std::size_t>(i)], 3));
    const Jet j = eval_jet(e, seeds);
    auto f = [&](const std::vector<double>& p) { return eval(e, p); };
    EXPECT_NEAR(j.value(), f(x), 1e-12 * std::max(1.0, std::abs(f(x))));
    for (int i = 0; i < 3; ++i) {
      EXPECT_LT(test_support::rel_err(j.partial({i}), test_support::fd_first(f, x, i, 1e-5)), 1e-6)
          << to_string(e);
      for (int k = i; k < 3; ++k)
        EXPECT_LT(test_support::rel_err(j.partial({i, k}), test_support::fd_second(f, x, i, k, 1e-4)),
                  1e-4)
            << to_string(e);
    }
  }
}

// Higher orders: d^3 and d^4 of jets are the finite differences of the
// jet's own lower-order partials.
TEST(Jet, ThirdAndFourthOrderConsistency) {
  test_support::ExpressionGenerator gen(2, 5);
  const auto vars = chart_variables(2);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Expr e = parse(gen.next(3), vars);
    const auto x = test_support::random_point(rng, 2, -1.0, 1.0);
    auto second = [&](const std::vector<double>& p) {
      std::vector<Jet> s{seed_variable(0, p[0], 2), seed_variable(1, p[1], 2)};
      return eval_jet(e, s).partial({0, 1});
    };
    std::vector<Jet> s{seed_variable(0, x[0], 2), seed_variable(1, x[1], 2)};
    const Jet j = eval_jet(e, s);
    EXPECT_LT(test_support::rel_err(j.partial({0, 1, 1}), test_support::fd_first(second, x, 1, 1e-5)), 1e-6);
    EXPECT_LT(test_support::rel_err(j.partial({0, 1, 0, 1}), test_support::fd_second(second, x, 0, 1, 1e-4)),
              1e-4);
  }
}
