#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2/FMA version; the active table is chosen once at startup
// from CPUID and can be pinned with MFLOW_KERNELS=scalar|avx2.
//
// Reductions accumulate in a fixed lane order, so a given table is
// deterministic. Scalar and AVX2 results agree to rounding, not bitwise.

#include <cstddef>
#include <string_view>

namespace mflow::kernels {

struct KernelTable {
  const char* name;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// sum_i w[i] * (a[i] * b[i]); the a*b product is formed first so the
  /// result is bitwise symmetric in (a, b).
  double (*dot3)(const double* w, const double* a, const double* b, std::size_t n);

  /// sum_i w[i] * |a[i] - b[i]|
  double (*weighted_abs_diff)(const double* w, const double* a, const double* b,
                              std::size_t n);

  /// y = A x for row-major A (rows x cols).
  void (*gemv)(const double* A, std::size_t rows, std::size_t cols, const double* x,
               double* y);

  /// y = A^T x for row-major A (rows x cols); y has cols entries.
  void (*gemv_t)(const double* A, std::size_t rows, std::size_t cols, const double* x,
                 double* y);

  /// out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// c[i] = decay[i] * c[i] + scale[i] * z[i]   (exact O-U transition)
  void (*ou_update)(double* c, const double* decay, const double* scale,
                    const double* z, std::size_t n);
};

const KernelTable& scalar_table();

/// Null when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

/// Table used by the library. Resolved once; thread-safe.
const KernelTable& active();

/// Pins the active table by name ("scalar" or "avx2"). Returns false when the
/// requested variant is unavailable. Not thread-safe against concurrent use.
bool select(std::string_view name);

}  // namespace mflow::kernels
