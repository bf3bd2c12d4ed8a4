#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "seq2api/errors.hpp"

// Dense double-precision linear algebra for the recurrent model: row-major
// matrices, the nonlinearities, a shift-stable softmax, and a central
// finite-difference oracle used by the gradient checks.

namespace seq2api::numerics {

struct DenseVector {
  std::vector<double> values;

  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit DenseVector(std::vector<double> v) : values(std::move(v)) {}
  DenseVector(std::initializer_list<double> init) : values(init) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
  void fill(double x) { values.assign(values.size(), x); }

  bool operator==(const DenseVector&) const = default;
};

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double* row(std::size_t r) { return values.data() + r * cols; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
  std::size_t size() const { return values.size(); }

  bool operator==(const DenseMatrix&) const = default;

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

inline std::string shape_string(const DenseMatrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) {
    throw shape_error("matmul: incompatible shapes " + shape_string(a) + " and " +
                      shape_string(b));
  }
  DenseMatrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

// y = M x
inline DenseVector matvec(const DenseMatrix& m, const DenseVector& x) {
  if (m.cols != x.size()) {
    throw shape_error("matvec: matrix " + shape_string(m) + " vs vector of length " +
                      std::to_string(x.size()));
  }
  DenseVector y(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

// y += M x
inline void matvec_acc(const DenseMatrix& m, const DenseVector& x, DenseVector& y) {
  if (m.cols != x.size() || m.rows != y.size()) {
    throw shape_error("matvec_acc: matrix " + shape_string(m) + " vs vectors " +
                      std::to_string(x.size()) + "/" + std::to_string(y.size()));
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y += M^T x (no transposed copy)
inline void matvec_transposed_acc(const DenseMatrix& m, const DenseVector& x,
                                  DenseVector& y) {
  if (m.rows != x.size() || m.cols != y.size()) {
    throw shape_error("matvec_transposed_acc: matrix " + shape_string(m) + " vs vectors " +
                      std::to_string(x.size()) + "/" + std::to_string(y.size()));
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += xi * row[j];
  }
}

// G += a b^T
inline void outer_acc(DenseMatrix& g, const DenseVector& a, const DenseVector& b) {
  if (g.rows != a.size() || g.cols != b.size()) {
    throw shape_error("outer_acc: matrix " + shape_string(g) + " vs vectors " +
                      std::to_string(a.size()) + "/" + std::to_string(b.size()));
  }
  for (std::size_t i = 0; i < g.rows; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    double* row = g.row(i);
    for (std::size_t j = 0; j < g.cols; ++j) row[j] += ai * b[j];
  }
}

inline double dot(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) {
    throw shape_error("dot: lengths " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// y += alpha * x
inline void axpy(double alpha, const DenseVector& x, DenseVector& y) {
  if (x.size() != y.size()) {
    throw shape_error("axpy: lengths " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Subtracts the max before exponentiating, so entries up to ~1e3 cannot
// overflow. Output sums to 1 within 1e-12.
inline DenseVector softmax(const DenseVector& v) {
  if (v.size() == 0) throw shape_error("softmax: empty vector");
  double mx = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) mx = std::max(mx, v[i]);
  DenseVector out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] /= sum;
  return out;
}

enum class Activation { Tanh, Sigmoid };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline DenseVector activate(const DenseVector& v, Activation kind) {
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = kind == Activation::Tanh ? std::tanh(v[i]) : sigmoid(v[i]);
  }
  return out;
}

// Central difference (f(x+eps e_i) - f(x-eps e_i)) / 2eps per coordinate.
// The oracle side of every model-level gradient check.
inline DenseVector finite_diff_gradient(const std::function<double(const DenseVector&)>& f,
                                        const DenseVector& point, double eps) {
  if (!(eps > 0.0)) throw value_error("finite_diff_gradient: eps must be positive");
  DenseVector grad(point.size());
  DenseVector probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double hi = f(probe);
    probe[i] = orig - eps;
    const double lo = f(probe);
    probe[i] = orig;
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      throw value_error("finite_diff_gradient: non-finite function value at coordinate " +
                        std::to_string(i));
    }
    grad[i] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

}  // namespace seq2api::numerics
