#pragma once

// Shared test helpers: seeded random expressions and finite differences.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace thinshell::test_support {

// Random well-formed expression in u1..un whose value is defined on all of
// R^n (log/sqrt arguments are kept positive).
class ExpressionGenerator {
 public:
  ExpressionGenerator(int n, std::uint64_t seed) : n_(n), rng_(seed) {}

  std::string next(int depth = 4) { return node(depth); }

 private:
  std::string leaf() {
    std::uniform_int_distribution<int> pick(0, 2);
    if (pick(rng_) == 0) {
      std::uniform_real_distribution<double> c(-2.0, 2.0);
      return "(" + std::to_string(c(rng_)) + ")";
    }
    std::uniform_int_distribution<int> var(1, n_);
    return "u" + std::to_string(var(rng_));
  }

  std::string node(int depth) {
    if (depth == 0) return leaf();
    std::uniform_int_distribution<int> pick(0, 9);
    const std::string a = node(depth - 1);
    switch (pick(rng_)) {
      case 0: return "(" + a + " + " + node(depth - 1) + ")";
      case 1: return "(" + a + " - " + node(depth - 1) + ")";
      case 2: return "(" + a + " * " + node(depth - 1) + ")";
      case 3: return "(" + a + " / (2 + sin(" + node(depth - 1) + ")))";
      case 4: return "sin(" + a + ")";
      case 5: return "cos(" + a + ")";
      case 6: return "exp(0.3*sin(" + a + "))";
      case 7: return "log(1.5 + cos(" + a + "))";
      case 8: return "sqrt(1 + (" + a + ")^2)";
      default: return "(" + a + ")^3";
    }
  }

  int n_;
  std::mt19937_64 rng_;
};

// Central first difference of f along e_i.
inline double fd_first(const std::function<double(const std::vector<double>&)>& f,
                       std::vector<double> x, int i, double h) {
  x[static_cast<std::size_t>(i)] += h;
  const double up = f(x);
  x[static_cast<std::size_t>(i)] -= 2.0 * h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

// Central mixed second difference along e_i, e_j.
inline double fd_second(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& x, int i, int j, double h) {
  auto at = [&](double si, double sj) {
    std::vector<double> y = x;
    y[static_cast<std::size_t>(i)] += si * h;
    y[static_cast<std::size_t>(j)] += sj * h;
    return f(y);
  };
  if (i == j) return (at(1, 0) - 2.0 * f(x) + at(-1, 0)) / (h * h);
  return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / (1.0 + want.cwiseAbs().maxCoeff());
}

inline std::vector<double> random_point(std::mt19937_64& rng, int n, double lo,
                                        double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> p;
  for (int i = 0; i < n; ++i) p.push_back(d(rng));
  return p;
}

}  // namespace thinshell::test_support
