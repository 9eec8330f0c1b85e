#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trendlab {

using Vector = std::vector<double>;

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  static Matrix identity(std::size_t n);
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// out += m * x
void gemv_acc(const Matrix& m, std::span<const double> x, std::span<double> out);
/// out += m^T * y
void gemv_t_acc(const Matrix& m, std::span<const double> y, std::span<double> out);
/// m += y * x^T
void outer_acc(std::span<const double> y, std::span<const double> x, Matrix& m);

}  // namespace trendlab
