#include "trendlab/linalg.hpp"

namespace trendlab {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void gemv_acc(const Matrix& m, std::span<const double> x, std::span<double> out) {
  const double* a = m.data.data();
  for (std::size_t r = 0; r < m.rows; ++r, a += m.cols) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += a[c] * x[c];
    out[r] += s;
  }
}

void gemv_t_acc(const Matrix& m, std::span<const double> y, std::span<double> out) {
  const double* a = m.data.data();
  double* o = out.data();
  for (std::size_t r = 0; r < m.rows; ++r, a += m.cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < m.cols; ++c) o[c] += a[c] * yr;
  }
}

void outer_acc(std::span<const double> y, std::span<const double> x, Matrix& m) {
  double* a = m.data.data();
  for (std::size_t r = 0; r < m.rows; ++r, a += m.cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < m.cols; ++c) a[c] += yr * x[c];
  }
}

}  // namespace trendlab
