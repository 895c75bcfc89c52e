#include <gtest/gtest.h>

#include <random>
#include <string>

#include "support.hpp"
#include "thinshell/expr.hpp"

using namespace thinshell;

namespace {
const std::vector<std::string> kUV = {"u1", "u2"};
}

TEST(Expr, ProductNode) {
  const Expr e = parse("sin(u1)*cos(u2)", kUV);
  EXPECT_EQ(e.root().kind, ExprNode::Kind::Binary);
  EXPECT_EQ(e.root().op, '*');
}

TEST(Expr, PowerIsRightAssociative) {
  EXPECT_DOUBLE_EQ(eval(parse("2^3^2", {}), {}), 512.0);
}

TEST(Expr, PrecedenceOfUnaryMinusAndPower) {
  EXPECT_DOUBLE_EQ(eval(parse("-2^2", {}), {}), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("2^-1", {}), {}), 0.5);
  EXPECT_DOUBLE_EQ(eval(parse("1 - 2 - 3", {}), {}), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("8 / 4 / 2", {}), {}), 1.0);
  EXPECT_DOUBLE_EQ(eval(parse("1 + 2 * 3", {}), {}), 7.0);
  EXPECT_DOUBLE_EQ(eval(parse("(1 + 2) * 3", {}), {}), 9.0);
  EXPECT_NEAR(eval(parse("2*pi - e", {}), {}), 2 * M_PI - M_E, 1e-15);
}

TEST(Expr, UnboundVariable) {
  try {
    parse("u3", kUV);
    FAIL() << "expected UnboundVariable";
  } catch (const UnboundVariable& e) {
    EXPECT_EQ(e.name(), "u3");
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Expr, ImplicitMultiplicationIsASyntaxError) {
  try {
    parse("2u1", kUV);
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 1u);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Expr, SyntaxErrorOffsets) {
  auto offset_of = [](const std::string& s) -> std::size_t {
    try {
      parse(s, kUV);
    } catch (const SyntaxError& e) {
      return e.offset();
    }
    return std::string::npos;
  };
  EXPECT_EQ(offset_of("u1 +"), 4u);
  EXPECT_EQ(offset_of("sin u1"), 4u);
  EXPECT_EQ(offset_of("(u1 + u2"), 8u);
  EXPECT_EQ(offset_of("u1 $ u2"), 3u);
  EXPECT_EQ(offset_of("foo(u1)"), 0u);
  EXPECT_EQ(offset_of(""), 0u);
}

TEST(Expr, ParametersBindAtParseTime) {
  const Expr e = parse("R*cos(u1)", {"u1"}, {{"R", 2.5}});
  const std::vector<double> p{0.0};
  EXPECT_DOUBLE_EQ(eval(e, p), 2.5);
}

TEST(Expr, EvalJetSquare) {
  const Expr e = parse("u1*u1", {"u1"});
  const std::vector<Jet> p{seed_variable(0, 3.0, 1)};
  const Jet j = eval_jet(e, p);
  EXPECT_DOUBLE_EQ(j.value(), 9.0);
  EXPECT_DOUBLE_EQ(j.partial({0}), 6.0);
  EXPECT_DOUBLE_EQ(j.partial({0, 0}), 2.0);
}

TEST(Expr, EvalJetDomainErrorIsAnnotated) {
  const Expr e = parse("1 + sqrt(u1)", {"u1"});
  const std::vector<Jet> p{seed_variable(0, -1.0, 1)};
  try {
    eval_jet(e, p);
    FAIL() << "expected DomainError";
  } catch (const DomainError& err) {
    ASSERT_TRUE(err.offset().has_value());
    EXPECT_EQ(*err.offset(), 4u);
  }
  const std::vector<double> d{-1.0};
  EXPECT_THROW(eval(e, d), DomainError);
  EXPECT_THROW(eval(parse("(-2)^0.5", {}), {}), DomainError);
  EXPECT_THROW(eval(parse("1/(u1-u1)", {"u1"}), d), DivisionByZero);
}

TEST(Expr, PythagoreanIdentity) {
  const Expr e = parse("sin(u1)^2 + cos(u1)^2", kUV);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto x = test_support::random_point(rng, 2, -4.0, 4.0);
    const std::vector<Jet> p{seed_variable(0, x[0], 2), seed_variable(1, x[1], 2)};
    const Jet j = eval_jet(e, p);
    EXPECT_NEAR(j.value(), 1.0, 1e-12);
    for (int m = 1; m < j.space().size(4); ++m) EXPECT_NEAR(j.coefficient(m), 0.0, 1e-12);
  }
}

TEST(Expr, PrettyPrintRoundTripIsStable) {
  test_support::ExpressionGenerator gen(2, 17);
  for (int t = 0; t < 200; ++t) {
    const std::string once = to_string(parse(gen.next(), kUV));
    const std::string twice = to_string(parse(once, kUV));
    EXPECT_EQ(once, twice);
  }
  const std::string neg = to_string(parse("a*u1", kUV, {{"a", -0.5}}));
  EXPECT_EQ(neg, to_string(parse(neg, kUV)));
}

// Random byte strings drawn from the expression alphabet: the parser either
// succeeds or reports a syntax error inside the source.
TEST(Expr, FuzzNeverCrashes) {
  const std::string alphabet = "u12+-*/^() .e5sincoxpqrtlgab$";
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(0, 24), pick(0, alphabet.size() - 1);
  int ok = 0, syntax = 0;
  for (int t = 0; t < 5000; ++t) {
    std::string s;
    for (std::size_t k = len(rng); k > 0; --k) s += alphabet[pick(rng)];
    try {
      parse(s, kUV);
      ++ok;
    } catch (const SyntaxError& e) {
      EXPECT_LE(e.offset(), s.size());
      ++syntax;
    } catch (const UnboundVariable& e) {
      EXPECT_LT(e.offset(), s.size());
    }
  }
  EXPECT_GT(ok, 0);
  EXPECT_GT(syntax, 0);
}

TEST(Expr, FirstPartialsMatchFiniteDifferences) {
  test_support::ExpressionGenerator gen(2, 123);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    const Expr e = parse(gen.next(), kUV);
    const auto x = test_support::random_point(rng, 2, -1.0, 1.0);
    const std::vector<Jet> p{seed_variable(0, x[0], 2), seed_variable(1, x[1], 2)};
    const Jet j = eval_jet(e, p);
    auto f = [&](const std::vector<double>& q) { return eval(e, q); };
    for (int i = 0; i < 2; ++i)
      EXPECT_LT(test_support::rel_err(j.partial({i}), test_support::fd_first(f, x, i, 1e-6)), 1e-6);
  }
}
