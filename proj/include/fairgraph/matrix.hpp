#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fairgraph/errors.hpp"
#include "fairgraph/rng.hpp"

namespace fairgraph {

// Dense row-major matrix of doubles. Vectors are n x 1, scalars 1 x 1.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  static Matrix zeros(int r, int c) { return Matrix(r, c); }

  static Matrix full(int r, int c, double v) {
    Matrix m(r, c);
    std::fill(m.data.begin(), m.data.end(), v);
    return m;
  }

  static Matrix scalar(double v) {
    Matrix m(1, 1);
    m.data[0] = v;
    return m;
  }

  static Matrix column(const std::vector<double>& v) {
    Matrix m(static_cast<int>(v.size()), 1);
    m.data = v;
    return m;
  }

  // Glorot-uniform init: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
  static Matrix glorot(int r, int c, Rng& rng) {
    Matrix m(r, c);
    const double a = std::sqrt(6.0 / (r + c));
    for (auto& x : m.data) x = (2.0 * rng.uniform_real() - 1.0) * a;
    return m;
  }

  static Matrix randn(int r, int c, Rng& rng, double stddev = 1.0) {
    Matrix m(r, c);
    for (auto& x : m.data) x = rng.normal() * stddev;
    return m;
  }

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
  }
};

inline void require_shape(const Matrix& m, int r, int c, const std::string& who) {
  if (m.rows != r || m.cols != c)
    throw DimensionError(who + ": expected " + std::to_string(r) + "x" + std::to_string(c) +
                         ", got " + std::to_string(m.rows) + "x" + std::to_string(m.cols));
}

// C = A * B, naive ikj order (cache friendly for row-major).
inline Matrix matmul_plain(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows));
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * static_cast<std::size_t>(a.cols)];
    double* crow = &c.data[static_cast<std::size_t>(i) * static_cast<std::size_t>(c.cols)];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[static_cast<std::size_t>(k) * static_cast<std::size_t>(b.cols)];
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// Sparse matrix in compressed sparse row form.
struct Csr {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col;
  std::vector<double> val;

  int nnz() const { return static_cast<int>(col.size()); }
  int row_len(int i) const { return row_ptr[static_cast<std::size_t>(i) + 1] - row_ptr[static_cast<std::size_t>(i)]; }

  // y = S * x for dense x.
  Matrix multiply(const Matrix& x) const {
    if (cols != x.rows) throw DimensionError("csr multiply: dimension mismatch");
    Matrix y(rows, x.cols);
    for (int i = 0; i < rows; ++i) {
      double* yrow = &y.data[static_cast<std::size_t>(i) * static_cast<std::size_t>(x.cols)];
      for (int p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
        const double v = val[static_cast<std::size_t>(p)];
        const double* xrow = &x.data[static_cast<std::size_t>(col[static_cast<std::size_t>(p)]) * static_cast<std::size_t>(x.cols)];
        for (int j = 0; j < x.cols; ++j) yrow[j] += v * xrow[j];
      }
    }
    return y;
  }

  // y = S^T * x, accumulated straight from the CSR layout.
  Matrix multiply_transposed(const Matrix& x) const {
    if (rows != x.rows) throw DimensionError("csr multiply_transposed: dimension mismatch");
    Matrix y(cols, x.cols);
    for (int i = 0; i < rows; ++i) {
      const double* xrow = &x.data[static_cast<std::size_t>(i) * static_cast<std::size_t>(x.cols)];
      for (int p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
        const double v = val[static_cast<std::size_t>(p)];
        double* yrow = &y.data[static_cast<std::size_t>(col[static_cast<std::size_t>(p)]) * static_cast<std::size_t>(x.cols)];
        for (int j = 0; j < x.cols; ++j) yrow[j] += v * xrow[j];
      }
    }
    return y;
  }

  Matrix to_dense() const {
    Matrix d(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
        d(i, col[static_cast<std::size_t>(p)]) += val[static_cast<std::size_t>(p)];
    return d;
  }
};

}  // namespace fairgraph
