// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <cmath>

#include "mflow/kernels.hpp"

namespace mflow::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3_avx2(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), ab, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * (a[i] * b[i]);
  return s;
}

double weighted_abs_diff_avx2(const double* w, const double* a, const double* b,
                              std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_andnot_pd(sign, diff), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * std::fabs(a[i] - b[i]);
  return s;
}

void gemv_avx2(const double* A, std::size_t rows, std::size_t cols, const double* x,
               double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(A + r * cols, x, cols);
}

void gemv_t_avx2(const double* A, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const __m256d xr = _mm256_set1_pd(x[r]);
    const double* row = A + r * cols;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(y + c, _mm256_fmadd_pd(xr, _mm256_loadu_pd(row + c),
                                              _mm256_loadu_pd(y + c)));
    for (; c < cols; ++c) y[c] += x[r] * row[c];
  }
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void ou_update_avx2(double* c, const double* decay, const double* scale, const double* z,
                    std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(decay + i), _mm256_loadu_pd(c + i));
    v = _mm256_fmadd_pd(_mm256_loadu_pd(scale + i), _mm256_loadu_pd(z + i), v);
    _mm256_storeu_pd(c + i, v);
  }
  for (; i < n; ++i) c[i] = decay[i] * c[i] + scale[i] * z[i];
}

constexpr KernelTable kAvx2{
    "avx2",      dot_avx2, dot3_avx2, weighted_abs_diff_avx2, gemv_avx2,
    gemv_t_avx2, mul_avx2, axpy_avx2, ou_update_avx2,
};

}  // namespace

const KernelTable& avx2_table_unchecked() { return kAvx2; }

}  // namespace mflow::kernels
