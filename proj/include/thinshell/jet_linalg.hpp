#pragma once

// Small dense matrices of jets. Sizes here never exceed 4x4, so the
// algorithms are the plain textbook ones.

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "thinshell/errors.hpp"
#include "thinshell/jet.hpp"

namespace thinshell {

using JetVector = std::vector<Jet>;

class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, const Jet& fill = Jet())
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Jet& operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i * cols_ + j)];
  }

  Eigen::MatrixXd values() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
    return m;
  }

  JetMatrix derivative(int var) const {
    JetMatrix d(rows_, cols_);
    for (std::size_t k = 0; k < a_.size(); ++k) d.a_[k] = a_[k].derivative(var);
    return d;
  }

  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
    JetMatrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j) {
        Jet s = a(i, 0) * b(0, j);
        for (int k = 1; k < a.cols_; ++k) s += a(i, k) * b(k, j);
        c(i, j) = s;
      }
    return c;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> a_;
};

inline Eigen::VectorXd values(const JetVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].value();
  return out;
}

inline JetVector operator*(const JetMatrix& m, const JetVector& v) {
  JetVector out(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) {
    Jet s = m(i, 0) * v[0];
    for (int k = 1; k < m.cols(); ++k) s += m(i, k) * v[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

inline Jet dot(const JetVector& a, const JetVector& b) {
  Jet s = a[0] * b[0];
  for (std::size_t k = 1; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline Jet determinant(const JetMatrix& m) {
  const int n = m.rows();
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Jet det;
  for (int j = 0; j < n; ++j) {
    JetMatrix minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = m(r, c);
    const Jet term = m(0, j) * determinant(minor);
    if (j % 2 == 0) det += term; else det -= term;
  }
  return det;
}

// Gauss-Jordan elimination with partial pivoting on the leading values.
inline JetMatrix inverse(const JetMatrix& m) {
  const int n = m.rows();
  JetMatrix a = m;
  JetMatrix inv(n, n);
  for (int i = 0; i < n; ++i) inv(i, i) = Jet(1.0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col).value()) > std::abs(a(pivot, col).value())) pivot = r;
    if (!(std::abs(a(pivot, col).value()) > 1e-300))
      throw DivisionByZero("singular jet matrix");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    const Jet p = reciprocal(a(col, col));
    for (int c = 0; c < n; ++c) {
      a(col, c) = a(col, c) * p;
      inv(col, c) = inv(col, c) * p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = a(r, col);
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace thinshell
