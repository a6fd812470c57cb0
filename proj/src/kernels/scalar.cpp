#include <cmath>

#include "mflow/kernels.hpp"

namespace mflow::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * (a[i] * b[i]);
  return s;
}

double weighted_abs_diff_scalar(const double* w, const double* a, const double* b,
                                std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::fabs(a[i] - b[i]);
  return s;
}

void gemv_scalar(const double* A, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(A + r * cols, x, cols);
}

void gemv_t_scalar(const double* A, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    const double* row = A + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += xr * row[c];
  }
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void ou_update_scalar(double* c, const double* decay, const double* scale,
                      const double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = decay[i] * c[i] + scale[i] * z[i];
}

constexpr KernelTable kScalar{
    "scalar",      dot_scalar, dot3_scalar,      weighted_abs_diff_scalar, gemv_scalar,
    gemv_t_scalar, mul_scalar, axpy_scalar,      ou_update_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace mflow::kernels
