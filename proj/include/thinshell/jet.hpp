#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet holds the Taylor coefficients of a scalar function around a point in
// up to four variables and up to total order four. Coefficients are stored
// once per multi-index, so mixed partials are symmetric by construction.
// Each jet also tracks the order to which its coefficients are valid:
// differentiating a jet lowers that order by one, and arithmetic keeps the
// smaller order of its operands. This lets geometric code take derivatives
// of derived quantities (tangents, normals, metrics) without ever reporting
// a coefficient it could not have computed exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinshell/errors.hpp"

namespace thinshell {

inline constexpr int kJetMaxOrder = 4;
inline constexpr int kJetMaxVars = 4;
// C(kJetMaxVars + kJetMaxOrder, kJetMaxOrder)
inline constexpr int kJetCapacity = 70;

class JetSpace {
 public:
  struct Term {
    std::uint8_t lhs, rhs, out;
  };

  static const JetSpace& of(int num_vars) {
    if (num_vars < 0 || num_vars > kJetMaxVars)
      throw IndexOutOfRange("jet spaces support 0.." +
                            std::to_string(kJetMaxVars) + " variables, got " +
                            std::to_string(num_vars));
    static const std::array<JetSpace, kJetMaxVars + 1> spaces = {
        JetSpace(0), JetSpace(1), JetSpace(2), JetSpace(3), JetSpace(4)};
    return spaces[num_vars];
  }

  int num_vars() const { return num_vars_; }
  // Number of monomials of total degree <= order.
  int size(int order) const { return size_[order]; }
  int degree(int m) const { return degree_[m]; }
  std::span<const std::uint8_t> exponents(int m) const {
    return {exponents_[m].data(), static_cast<std::size_t>(num_vars_)};
  }

  // Monomial index for an exponent tuple, or -1 if the degree exceeds the
  // maximum order.
  int index_of(std::span<const int> exps) const {
    int key = 0, weight = 1, total = 0;
    for (int v = 0; v < num_vars_; ++v) {
      if (exps[v] < 0) return -1;
      total += exps[v];
      key += exps[v] * weight;
      weight *= kJetMaxOrder + 1;
    }
    if (total > kJetMaxOrder) return -1;
    return lookup_[key];
  }

  // Index of m + e_var, or -1 if that exceeds the maximum order.
  int shifted(int m, int var) const { return shifted_[m][var]; }

  // All (lhs, rhs) pairs whose product lands on a monomial of degree <= order.
  std::span<const Term> products(int order) const {
    return {products_.data(), static_cast<std::size_t>(product_end_[order])};
  }

 private:
  explicit JetSpace(int num_vars) : num_vars_(num_vars) {
    lookup_.fill(-1);
    int count = 0;
    for (int d = 0; d <= kJetMaxOrder; ++d) {
      std::array<int, kJetMaxVars> e{};
      enumerate(0, d, e, count);
      size_[d] = count;
    }
    for (int m = 0; m < count; ++m) {
      for (int v = 0; v < kJetMaxVars; ++v) {
        shifted_[m][v] = -1;
        if (v >= num_vars_) continue;
        std::array<int, kJetMaxVars> e{};
        for (int w = 0; w < num_vars_; ++w) e[w] = exponents_[m][w];
        ++e[v];
        shifted_[m][v] = index_of(e);
      }
    }
    for (int d = 0; d <= kJetMaxOrder; ++d) {
      for (int a = 0; a < count; ++a) {
        for (int b = 0; b < count; ++b) {
          if (degree_[a] + degree_[b] != d) continue;
          std::array<int, kJetMaxVars> e{};
          for (int w = 0; w < num_vars_; ++w)
            e[w] = exponents_[a][w] + exponents_[b][w];
          products_.push_back({static_cast<std::uint8_t>(a),
                               static_cast<std::uint8_t>(b),
                               static_cast<std::uint8_t>(index_of(e))});
        }
      }
      product_end_[d] = static_cast<int>(products_.size());
    }
  }

  // Graded lexicographic enumeration of exponent tuples of total degree d.
  void enumerate(int var, int remaining, std::array<int, kJetMaxVars>& e,
                 int& count) {
    if (num_vars_ == 0 || var == num_vars_ - 1) {
      if (num_vars_ == 0 && remaining > 0) return;
      if (num_vars_ > 0) e[var] = remaining;
      int key = 0, weight = 1;
      for (int v = 0; v < num_vars_; ++v) {
        exponents_[count][v] = static_cast<std::uint8_t>(e[v]);
        key += e[v] * weight;
        weight *= kJetMaxOrder + 1;
      }
      int total = 0;
      for (int v = 0; v < num_vars_; ++v) total += e[v];
      degree_[count] = total;
      lookup_[key] = count;
      ++count;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[var] = k;
      enumerate(var + 1, remaining - k, e, count);
    }
  }

  int num_vars_;
  std::array<int, kJetMaxOrder + 1> size_{};
  std::array<int, kJetCapacity> degree_{};
  std::array<std::array<std::uint8_t, kJetMaxVars>, kJetCapacity> exponents_{};
  std::array<std::array<int, kJetMaxVars>, kJetCapacity> shifted_{};
  std::array<int, 625> lookup_{};
  std::vector<Term> products_;
  std::array<int, kJetMaxOrder + 1> product_end_{};
};

class Jet {
 public:
  Jet() : Jet(0.0) {}
  // A constant in zero variables; combines with jets over any variable set.
  Jet(double value) : space_(&JetSpace::of(0)), order_(kJetMaxOrder) {
    c_.fill(0.0);
    c_[0] = value;
  }

  static Jet constant(double value, int num_vars,
                      int order = kJetMaxOrder) {
    Jet j(value);
    j.space_ = &JetSpace::of(num_vars);
    j.order_ = order;
    return j;
  }

  // The coordinate function u^index around u^index = value.
  static Jet variable(int index, double value, int num_vars,
                      int order = kJetMaxOrder) {
    if (index < 0 || index >= num_vars)
      throw IndexOutOfRange("jet variable index " + std::to_string(index) +
                            " out of range for " + std::to_string(num_vars) +
                            " variables");
    Jet j = constant(value, num_vars, order);
    if (order >= 1) j.c_[j.space_->shifted(0, index)] = 1.0;
    return j;
  }

  double value() const { return c_[0]; }
  int order() const { return order_; }
  int num_vars() const { return space_->num_vars(); }
  const JetSpace& space() const { return *space_; }
  double coefficient(int monomial) const { return c_[monomial]; }

  bool is_constant() const {
    for (int m = 1; m < space_->size(order_); ++m)
      if (c_[m] != 0.0) return false;
    return true;
  }

  // Partial derivative with respect to the listed variables, e.g. {0, 0, 1}
  // for d^3/du0^2 du1.
  double partial(std::span<const int> vars) const {
    if (static_cast<int>(vars.size()) > order_)
      throw IndexOutOfRange("derivative of order " +
                            std::to_string(vars.size()) +
                            " requested from a jet valid to order " +
                            std::to_string(order_));
    std::array<int, kJetMaxVars> e{};
    for (int v : vars) {
      if (v < 0 || v >= num_vars())
        throw IndexOutOfRange("derivative variable " + std::to_string(v) +
                              " out of range");
      ++e[v];
    }
    double factorial = 1.0;
    for (int v = 0; v < num_vars(); ++v)
      for (int k = 2; k <= e[v]; ++k) factorial *= k;
    return c_[space_->index_of(e)] * factorial;
  }
  double partial(std::initializer_list<int> vars) const {
    return partial(std::span<const int>(vars.begin(), vars.size()));
  }

  // The jet of d/du^var, valid to one order less.
  Jet derivative(int var) const {
    if (var < 0 || var >= num_vars())
      throw IndexOutOfRange("derivative variable " + std::to_string(var) +
                            " out of range");
    if (order_ == 0)
      throw IndexOutOfRange("cannot differentiate an order-0 jet");
    Jet d = constant(0.0, num_vars(), order_ - 1);
    for (int m = 0; m < space_->size(order_ - 1); ++m) {
      const int up = space_->shifted(m, var);
      d.c_[m] = c_[up] * (space_->exponents(m)[var] + 1);
    }
    return d;
  }

  Jet truncated(int order) const {
    Jet t = *this;
    t.order_ = std::min(order_, order);
    t.zero_tail();
    return t;
  }

  Jet operator-() const {
    Jet r = *this;
    for (int m = 0; m < space_->size(order_); ++m) r.c_[m] = -c_[m];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    adopt(o);
    for (int m = 0; m < space_->size(order_); ++m) c_[m] += o.c_[m];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    adopt(o);
    for (int m = 0; m < space_->size(order_); ++m) c_[m] -= o.c_[m];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }
  Jet& operator*=(double s) {
    for (int m = 0; m < space_->size(order_); ++m) c_[m] *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.num_vars() == 0) return b * a.value();
    if (b.num_vars() == 0) return a * b.value();
    Jet r = constant(0.0, common(a, b)->num_vars(), std::min(a.order_, b.order_));
    for (const auto& t : r.space_->products(r.order_))
      r.c_[t.out] += a.c_[t.lhs] * b.c_[t.rhs];
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b);

  // f(x) from the derivatives f^(k)(x.value()), k = 0..kJetMaxOrder.
  friend Jet compose(const Jet& x,
                     const std::array<double, kJetMaxOrder + 1>& derivs) {
    Jet delta = x;
    delta.c_[0] = 0.0;
    Jet result = constant(derivs[0], x.num_vars(), x.order_);
    Jet power = delta;
    double factorial = 1.0;
    for (int k = 1; k <= x.order_; ++k) {
      factorial *= k;
      if (derivs[k] != 0.0) result += power * (derivs[k] / factorial);
      if (k < x.order_) power = power * delta;
    }
    return result;
  }

 private:
  static const JetSpace* common(const Jet& a, const Jet& b) {
    if (a.space_ == b.space_) return a.space_;
    if (a.num_vars() == 0) return b.space_;
    if (b.num_vars() == 0) return a.space_;
    throw std::invalid_argument("jets over different variable sets");
  }

  void adopt(const Jet& o) {
    space_ = common(*this, o);
    if (o.order_ < order_) {
      order_ = o.order_;
      zero_tail();
    }
  }

  void zero_tail() {
    for (int m = space_->size(order_); m < kJetCapacity; ++m) c_[m] = 0.0;
  }

  const JetSpace* space_;
  int order_;
  std::array<double, kJetCapacity> c_;
};

inline Jet seed_variable(int index, double value, int num_vars) {
  return Jet::variable(index, value, num_vars);
}

inline Jet reciprocal(const Jet& x) {
  const double a = x.value();
  if (!(std::abs(a) > 1e-300))
    throw DivisionByZero("division by a jet with value " + std::to_string(a));
  std::array<double, kJetMaxOrder + 1> d{};
  double inv = 1.0 / a, p = inv, sign = 1.0, fact = 1.0;
  for (int k = 0; k <= kJetMaxOrder; ++k) {
    d[k] = sign * fact * p;
    p *= inv;
    sign = -sign;
    fact *= k + 1;
  }
  return compose(x, d);
}

inline Jet operator/(const Jet& a, const Jet& b) {
  if (b.num_vars() == 0 || b.is_constant()) {
    if (!(std::abs(b.value()) > 1e-300))
      throw DivisionByZero("division by a jet with value " +
                           std::to_string(b.value()));
    return a * (1.0 / b.value());
  }
  return a * reciprocal(b);
}
inline Jet operator+(Jet a, double s) { return a += Jet(s); }
inline Jet operator+(double s, Jet a) { return a += Jet(s); }
inline Jet operator-(Jet a, double s) { return a -= Jet(s); }
inline Jet operator-(double s, const Jet& a) { return Jet(s) - a; }
inline Jet operator/(const Jet& a, double s) { return a / Jet(s); }
inline Jet operator/(double s, const Jet& a) { return Jet(s) / a; }

inline Jet sin(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return compose(x, {s, c, -s, -c, s});
}

inline Jet cos(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return compose(x, {c, -s, -c, s, c});
}

inline Jet tan(const Jet& x) {
  if (!(std::abs(std::cos(x.value())) > 1e-300))
    throw DomainError("tan at a pole");
  const double t = std::tan(x.value()), s = 1.0 + t * t;
  return compose(x, {t, s, 2.0 * t * s, 2.0 * s * (1.0 + 3.0 * t * t),
                     8.0 * t * s * (2.0 + 3.0 * t * t)});
}

inline Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  return compose(x, {e, e, e, e, e});
}

inline Jet log(const Jet& x) {
  const double a = x.value();
  if (!(a > 0.0))
    throw DomainError("log of non-positive value " + std::to_string(a));
  const double i = 1.0 / a;
  return compose(x, {std::log(a), i, -i * i, 2.0 * i * i * i,
                     -6.0 * i * i * i * i});
}

// x^c for real c; derivatives c(c-1)...(c-k+1) x^(c-k).
inline Jet power_composed(const Jet& x, double c) {
  const double a = x.value();
  std::array<double, kJetMaxOrder + 1> d{};
  double falling = 1.0;
  for (int k = 0; k <= kJetMaxOrder; ++k) {
    d[k] = falling == 0.0 ? 0.0 : falling * std::pow(a, c - k);
    falling *= c - k;
  }
  return compose(x, d);
}

inline Jet sqrt(const Jet& x) {
  const double a = x.value();
  if (a < 0.0)
    throw DomainError("sqrt of negative value " + std::to_string(a));
  if (a == 0.0) {
    if (x.is_constant()) return x;
    throw DomainError("sqrt is not differentiable at 0");
  }
  return power_composed(x, 0.5);
}

inline Jet abs(const Jet& x) {
  if (x.value() > 0.0) return x;
  if (x.value() < 0.0) return -x;
  if (x.is_constant()) return x;
  throw DomainError("abs is not differentiable at 0");
}

inline Jet pow(const Jet& x, double c) {
  if (std::isfinite(c) && c == std::round(c) && std::abs(c) <= 64.0) {
    long n = std::lround(std::abs(c));
    Jet result = Jet::constant(1.0, x.num_vars(), x.order());
    Jet base = x;
    while (n > 0) {
      if (n & 1) result = result * base;
      n >>= 1;
      if (n > 0) base = base * base;
    }
    return c < 0.0 ? reciprocal(result) : result;
  }
  const double a = x.value();
  if (a < 0.0)
    throw DomainError("negative base " + std::to_string(a) +
                      " raised to non-integer power");
  if (a == 0.0) {
    if (x.is_constant() && c > 0.0) return Jet::constant(0.0, x.num_vars(), x.order());
    throw DomainError("non-integer power is not differentiable at 0");
  }
  return power_composed(x, c);
}

inline Jet pow(const Jet& x, const Jet& y) {
  if (y.num_vars() == 0 || y.is_constant()) return pow(x, y.value());
  if (!(x.value() > 0.0))
    throw DomainError("variable exponent requires a positive base, got " +
                      std::to_string(x.value()));
  return exp(y * log(x));
}

}  // namespace thinshell
