#pragma once

// Analytic scalar expressions: parser, printer, and evaluation over doubles
// or jets.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | name | func '(' sum ')' | '(' sum ')'
//
// Names resolve against the declared variable list, then caller-supplied
// parameters, then the constants pi and e. There is no implicit
// multiplication.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thinshell/errors.hpp"
#include "thinshell/jet.hpp"

namespace thinshell {

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

inline constexpr std::string_view func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

struct ExprNode {
  enum class Kind { Number, Constant, Variable, Negate, Binary, Call };

  Kind kind = Kind::Number;
  double value = 0.0;     // Number, Constant
  std::string name;       // Constant, Variable
  int variable = -1;      // Variable
  char op = 0;            // Binary: + - * / ^
  Func func = Func::Sin;  // Call
  std::shared_ptr<const ExprNode> lhs, rhs;
  std::size_t offset = 0;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

class Expr {
 public:
  Expr() = default;
  Expr(ExprPtr root, std::vector<std::string> variables)
      : root_(std::move(root)), variables_(std::move(variables)) {}

  const ExprNode& root() const { return *root_; }
  const std::vector<std::string>& variables() const { return variables_; }
  bool empty() const { return root_ == nullptr; }

 private:
  ExprPtr root_;
  std::vector<std::string> variables_;
};

namespace detail {

inline const std::map<std::string, Func, std::less<>>& function_table() {
  static const std::map<std::string, Func, std::less<>> table = {
      {"sin", Func::Sin},   {"cos", Func::Cos}, {"tan", Func::Tan},
      {"exp", Func::Exp},   {"log", Func::Log}, {"sqrt", Func::Sqrt},
      {"abs", Func::Abs}};
  return table;
}

struct Token {
  enum class Kind { Number, Name, Op, LParen, RParen, End };
  Kind kind = Kind::End;
  std::string_view text;
  double number = 0.0;
  std::size_t offset = 0;
};

class Parser {
 public:
  Parser(std::string_view source, std::span<const std::string> variables,
         const std::map<std::string, double>& parameters)
      : src_(source), variables_(variables), parameters_(parameters) {
    advance();
  }

  ExprPtr parse() {
    if (tok_.kind == Token::Kind::End)
      throw SyntaxError("empty expression", tok_.offset,
                        {"number", "name", "(", "-"});
    ExprPtr e = sum();
    if (tok_.kind != Token::Kind::End)
      throw SyntaxError("unexpected '" + std::string(tok_.text) + "'",
                        tok_.offset,
                        {"+", "-", "*", "/", "^", tok_depth_ ? ")" : "end"});
    return e;
  }

 private:
  static bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9');
  }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  void advance() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    const char c = src_[pos_];
    if (is_digit(c) || c == '.') {
      std::size_t end = pos_;
      while (end < src_.size() && is_digit(src_[end])) ++end;
      if (end < src_.size() && src_[end] == '.') {
        ++end;
        while (end < src_.size() && is_digit(src_[end])) ++end;
      }
      if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
        std::size_t exp_end = end + 1;
        if (exp_end < src_.size() &&
            (src_[exp_end] == '+' || src_[exp_end] == '-'))
          ++exp_end;
        if (exp_end < src_.size() && is_digit(src_[exp_end])) {
          while (exp_end < src_.size() && is_digit(src_[exp_end])) ++exp_end;
          end = exp_end;
        }
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, v);
      if (ec != std::errc() || ptr != src_.data() + end)
        throw SyntaxError("malformed number", pos_, {"number"});
      tok_.kind = Token::Kind::Number;
      tok_.number = v;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    if (is_name_start(c)) {
      std::size_t end = pos_;
      while (end < src_.size() && is_name_char(src_[end])) ++end;
      tok_.kind = Token::Kind::Name;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    tok_.text = src_.substr(pos_, 1);
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        tok_.kind = Token::Kind::Op;
        break;
      case '(':
        tok_.kind = Token::Kind::LParen;
        break;
      case ')':
        tok_.kind = Token::Kind::RParen;
        break;
      default:
        throw SyntaxError("unexpected character '" + std::string(1, c) + "'",
                          pos_, {"number", "name", "operator", "(", ")"});
    }
    ++pos_;
  }

  bool at_op(char c) const {
    return tok_.kind == Token::Kind::Op && tok_.text[0] == c;
  }

  static ExprPtr binary(char op, ExprPtr l, ExprPtr r, std::size_t offset) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binary;
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    n->offset = offset;
    return n;
  }

  ExprPtr sum() {
    ExprPtr e = product();
    while (at_op('+') || at_op('-')) {
      const char op = tok_.text[0];
      const std::size_t at = tok_.offset;
      advance();
      e = binary(op, e, product(), at);
    }
    return e;
  }

  ExprPtr product() {
    ExprPtr e = unary();
    while (at_op('*') || at_op('/')) {
      const char op = tok_.text[0];
      const std::size_t at = tok_.offset;
      advance();
      e = binary(op, e, unary(), at);
    }
    return e;
  }

  ExprPtr unary() {
    if (at_op('-')) {
      const std::size_t at = tok_.offset;
      advance();
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Negate;
      n->lhs = unary();
      n->offset = at;
      return n;
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (at_op('^')) {
      const std::size_t at = tok_.offset;
      advance();
      return binary('^', base, unary(), at);
    }
    return base;
  }

  ExprPtr primary() {
    const Token t = tok_;
    switch (t.kind) {
      case Token::Kind::Number: {
        advance();
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Number;
        n->value = t.number;
        n->offset = t.offset;
        return n;
      }
      case Token::Kind::LParen: {
        advance();
        ++tok_depth_;
        ExprPtr e = sum();
        --tok_depth_;
        expect_rparen();
        return e;
      }
      case Token::Kind::Name:
        return name(t);
      default:
        throw SyntaxError(t.kind == Token::Kind::End
                              ? "unexpected end of input"
                              : "unexpected '" + std::string(t.text) + "'",
                          t.offset, {"number", "name", "(", "-"});
    }
  }

  void expect_rparen() {
    if (tok_.kind != Token::Kind::RParen)
      throw SyntaxError(tok_.kind == Token::Kind::End
                            ? "unexpected end of input"
                            : "unexpected '" + std::string(tok_.text) + "'",
                        tok_.offset, {")", "+", "-", "*", "/", "^"});
    advance();
  }

  ExprPtr name(const Token& t) {
    advance();
    const auto& funcs = function_table();
    if (auto f = funcs.find(t.text); f != funcs.end()) {
      if (tok_.kind != Token::Kind::LParen)
        throw SyntaxError("function '" + std::string(t.text) +
                              "' must be called",
                          tok_.offset, {"("});
      advance();
      ++tok_depth_;
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Call;
      n->func = f->second;
      n->lhs = sum();
      n->offset = t.offset;
      --tok_depth_;
      expect_rparen();
      return n;
    }
    if (tok_.kind == Token::Kind::LParen) {
      std::vector<std::string> expected;
      for (const auto& [k, v] : funcs) expected.push_back(k);
      throw SyntaxError("unknown function '" + std::string(t.text) + "'",
                        t.offset, expected);
    }
    auto n = std::make_shared<ExprNode>();
    n->offset = t.offset;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == t.text) {
        n->kind = ExprNode::Kind::Variable;
        n->variable = static_cast<int>(i);
        n->name = variables_[i];
        return n;
      }
    }
    if (auto p = parameters_.find(std::string(t.text)); p != parameters_.end()) {
      n->kind = ExprNode::Kind::Number;
      n->value = p->second;
      return n;
    }
    if (t.text == "pi" || t.text == "e") {
      n->kind = ExprNode::Kind::Constant;
      n->name = std::string(t.text);
      n->value = t.text == "pi" ? M_PI : M_E;
      return n;
    }
    throw UnboundVariable(std::string(t.text), t.offset);
  }

  std::string_view src_;
  std::span<const std::string> variables_;
  const std::map<std::string, double>& parameters_;
  std::size_t pos_ = 0;
  int tok_depth_ = 0;
  Token tok_;
};

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void print(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprNode::Kind::Number:
      if (std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case ExprNode::Kind::Constant:
    case ExprNode::Kind::Variable:
      out += n.name;
      return;
    case ExprNode::Kind::Negate:
      out += "(-";
      print(*n.lhs, out);
      out += ")";
      return;
    case ExprNode::Kind::Binary:
      out += "(";
      print(*n.lhs, out);
      out += ' ';
      out += n.op;
      out += ' ';
      print(*n.rhs, out);
      out += ")";
      return;
    case ExprNode::Kind::Call:
      out += func_name(n.func);
      out += "(";
      print(*n.lhs, out);
      out += ")";
      return;
  }
}

inline double apply(Func f, double x) {
  switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Tan:
      if (!(std::abs(std::cos(x)) > 1e-300)) throw DomainError("tan at a pole");
      return std::tan(x);
    case Func::Exp: return std::exp(x);
    case Func::Log:
      if (!(x > 0.0))
        throw DomainError("log of non-positive value " + std::to_string(x));
      return std::log(x);
    case Func::Sqrt:
      if (x < 0.0)
        throw DomainError("sqrt of negative value " + std::to_string(x));
      return std::sqrt(x);
    case Func::Abs: return std::abs(x);
  }
  return 0.0;
}

inline Jet apply(Func f, const Jet& x) {
  switch (f) {
    case Func::Sin: return sin(x);
    case Func::Cos: return cos(x);
    case Func::Tan: return tan(x);
    case Func::Exp: return exp(x);
    case Func::Log: return log(x);
    case Func::Sqrt: return sqrt(x);
    case Func::Abs: return abs(x);
  }
  return x;
}

inline double divide(double a, double b) {
  if (!(std::abs(b) > 1e-300))
    throw DivisionByZero("division by " + std::to_string(b));
  return a / b;
}
inline Jet divide(const Jet& a, const Jet& b) { return a / b; }

inline double power(double a, double b) {
  if (a < 0.0 && b != std::round(b))
    throw DomainError("negative base " + std::to_string(a) +
                      " raised to non-integer power");
  if (a == 0.0 && b < 0.0) throw DivisionByZero("zero raised to negative power");
  return std::pow(a, b);
}
inline Jet power(const Jet& a, const Jet& b) { return pow(a, b); }

template <class T>
T constant_like(double v, std::span<const T> point) {
  if constexpr (std::is_same_v<T, Jet>) {
    if (!point.empty())
      return Jet::constant(v, point[0].num_vars(), kJetMaxOrder);
    return Jet(v);
  } else {
    return T(v);
  }
}

template <class T>
T evaluate(const ExprNode& n, std::span<const T> point) {
  try {
    switch (n.kind) {
      case ExprNode::Kind::Number:
      case ExprNode::Kind::Constant:
        return constant_like<T>(n.value, point);
      case ExprNode::Kind::Variable:
        return point[n.variable];
      case ExprNode::Kind::Negate:
        return -evaluate(*n.lhs, point);
      case ExprNode::Kind::Binary: {
        const T l = evaluate(*n.lhs, point);
        const T r = evaluate(*n.rhs, point);
        switch (n.op) {
          case '+': return l + r;
          case '-': return l - r;
          case '*': return l * r;
          case '/': return divide(l, r);
          case '^': return power(l, r);
        }
        break;
      }
      case ExprNode::Kind::Call:
        return apply(n.func, evaluate(*n.lhs, point));
    }
  } catch (const DomainError& e) {
    if (e.offset()) throw;
    throw DomainError(e.what(), n.offset);
  } catch (const DivisionByZero& e) {
    if (e.offset()) throw;
    throw DivisionByZero(e.what(), n.offset);
  }
  return constant_like<T>(0.0, point);
}

}  // namespace detail

inline Expr parse(std::string_view source,
                  const std::vector<std::string>& variables,
                  const std::map<std::string, double>& parameters = {}) {
  detail::Parser p(source, variables, parameters);
  return Expr(p.parse(), variables);
}

// Fully parenthesized rendering; parse(to_string(e)) reproduces the tree.
inline std::string to_string(const Expr& e) {
  std::string out;
  if (!e.empty()) detail::print(e.root(), out);
  return out;
}

template <class T>
T evaluate(const Expr& e, std::span<const T> point) {
  if (point.size() != e.variables().size())
    throw IndexOutOfRange("expression expects " +
                          std::to_string(e.variables().size()) +
                          " variables, got " + std::to_string(point.size()));
  return detail::evaluate<T>(e.root(), point);
}

inline double eval(const Expr& e, std::span<const double> point) {
  return evaluate<double>(e, point);
}

inline Jet eval_jet(const Expr& e, std::span<const Jet> point) {
  return evaluate<Jet>(e, point);
}

// Chart variable names u1..un.
inline std::vector<std::string> chart_variables(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("u" + std::to_string(i));
  return v;
}

}  // namespace thinshell
