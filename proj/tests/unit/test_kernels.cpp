#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "mflow/kernels.hpp"
#include "mflow/rng.hpp"

using namespace mflow;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t idx) {
  RandomStream rng(7, streams::kAudit, idx);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_SUITE("kernels") {
TEST_CASE("scalar table matches naive loops") {
  const auto& k = kernels::scalar_table();
  const auto a = randn(37, 0), b = randn(37, 1), w = randn(37, 2);
  double d = 0.0, d3 = 0.0, ad = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    d3 += w[i] * a[i] * b[i];
    ad += w[i] * std::fabs(a[i] - b[i]);
  }
  CHECK(rel(k.dot(a.data(), b.data(), a.size()), d) < 1e-14);
  CHECK(rel(k.dot3(w.data(), a.data(), b.data(), a.size()), d3) < 1e-14);
  CHECK(rel(k.weighted_abs_diff(w.data(), a.data(), b.data(), a.size()), ad) < 1e-14);
}

TEST_CASE("dot3 is bitwise symmetric in its last two arguments") {
  for (const kernels::KernelTable* t : {&kernels::scalar_table(), kernels::avx2_table()}) {
    if (!t) continue;
    const auto a = randn(101, 3), b = randn(101, 4), w = randn(101, 5);
    CHECK(t->dot3(w.data(), a.data(), b.data(), 101) == t->dot3(w.data(), b.data(), a.data(), 101));
  }
}

TEST_CASE("avx2 variants agree with scalar references") {
  const kernels::KernelTable* v = kernels::avx2_table();
  if (!v) {
    MESSAGE("AVX2 unavailable; equivalence skipped");
    return;
  }
  const auto& s = kernels::scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 13u, 64u, 1001u}) {
    const auto a = randn(n, 10 + n), b = randn(n, 20 + n), w = randn(n, 30 + n);
    CHECK(rel(v->dot(a.data(), b.data(), n), s.dot(a.data(), b.data(), n)) < 1e-12);
    CHECK(rel(v->dot3(w.data(), a.data(), b.data(), n), s.dot3(w.data(), a.data(), b.data(), n)) < 1e-12);
    CHECK(rel(v->weighted_abs_diff(w.data(), a.data(), b.data(), n),
              s.weighted_abs_diff(w.data(), a.data(), b.data(), n)) < 1e-12);

    std::vector<double> o1(n), o2(n), y1 = b, y2 = b, c1 = a, c2 = a;
    s.mul(a.data(), b.data(), o1.data(), n);
    v->mul(a.data(), b.data(), o2.data(), n);
    CHECK(o1 == o2);
    s.axpy(0.3, a.data(), y1.data(), n);
    v->axpy(0.3, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    const auto decay = randn(n, 40 + n);
    s.ou_update(c1.data(), decay.data(), w.data(), b.data(), n);
    v->ou_update(c2.data(), decay.data(), w.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-15));
  }
  for (std::size_t rows : {1u, 5u, 9u}) {
    for (std::size_t cols : {1u, 4u, 11u, 40u}) {
      const auto A = randn(rows * cols, rows * 100 + cols), x = randn(cols, 7), xt = randn(rows, 8);
      std::vector<double> y1(rows), y2(rows), z1(cols), z2(cols);
      s.gemv(A.data(), rows, cols, x.data(), y1.data());
      v->gemv(A.data(), rows, cols, x.data(), y2.data());
      s.gemv_t(A.data(), rows, cols, xt.data(), z1.data());
      v->gemv_t(A.data(), rows, cols, xt.data(), z2.data());
      for (std::size_t i = 0; i < rows; ++i) CHECK(rel(y1[i], y2[i]) < 1e-12);
      for (std::size_t j = 0; j < cols; ++j) CHECK(rel(z1[j], z2[j]) < 1e-12);
    }
  }
}

TEST_CASE("select pins the table by name") {
  const std::string before = kernels::active().name;
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == kernels::scalar_table().name);
  CHECK_FALSE(kernels::select("sse9"));
  CHECK(kernels::select(before));
}
}
