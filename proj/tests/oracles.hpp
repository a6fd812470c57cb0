#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

/// Closed-form normalized Hermite functions for n <= 3.
inline double hermite_closed(int n, double y) {
  const double p0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
  switch (n) {
    case 0: return p0;
    case 1: return std::sqrt(2.0) * y * p0;
    case 2: return (2.0 * y * y - 1.0) / std::sqrt(2.0) * p0;
    case 3: return (2.0 * y * y * y - 3.0 * y) / std::sqrt(3.0) * p0;
    default: return std::nan("");
  }
}

/// Rayleigh quotient <xi, (-d^2/dy^2 + y^2 + alpha) xi> by a fine midpoint
/// rule with a 4th-order central second difference.
template <class F>
double rayleigh_1d(F xi, double alpha, double L = 14.0, int n = 28000) {
  const double h = 2.0 * L / n, e = 1e-3;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = -L + (i + 0.5) * h;
    const double v = xi(y);
    const double d2 = (-xi(y + 2 * e) + 16 * xi(y + e) - 30 * v + 16 * xi(y - e) - xi(y - 2 * e)) / (12 * e * e);
    num += (-d2 + y * y * v + alpha * v) * v * h;
    den += v * v * h;
  }
  return num / den;
}

/// min over tau of sum_i w_i (|g_i| - tau)^+ + tau, by ternary search on the
/// convex piecewise-linear objective followed by a breakpoint sweep nearby.
inline double k_functional_threshold(const std::vector<double>& g, const std::vector<double>& w) {
  auto F = [&](double tau) {
    double s = tau;
    for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * std::max(std::fabs(g[i]) - tau, 0.0);
    return s;
  };
  double lo = 0.0, hi = 0.0;
  for (double x : g) hi = std::max(hi, std::fabs(x));
  for (int it = 0; it < 300; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (F(m1) <= F(m2)) hi = m2;
    else lo = m1;
  }
  double best = std::min(F(0.0), F(0.5 * (lo + hi)));
  for (double x : g) best = std::min(best, F(std::fabs(x)));
  return best;
}

/// sum_n ln sum_{j>=0} e^{-2 q_n j t}: the truncated density product via
/// per-mode geometric series.
inline double log_density_lhs_series(const std::vector<double>& rates, double t) {
  double out = 0.0;
  for (double q : rates) {
    const double x = std::exp(-2.0 * q * t);
    double s = 0.0, term = 1.0;
    for (int j = 0; j < 10000000 && term > 1e-18 * s; ++j) {
      s += term;
      term *= x;
    }
    out += std::log(s);
  }
  return out;
}

/// lambda(h ln h) - lambda(h) for h the N(0, v) density in d = 1.
inline double gaussian_entropy_functional(double v) { return -0.5 * std::log(2.0 * std::numbers::pi * std::exp(1.0) * v) - 1.0; }

/// Ent(u^2) / E u^2 for u = exp(a X), X ~ N(0, v): equals 2 a^2 v.
inline double lsi_exponential_entropy(double a, double v) { return 2.0 * a * a * v; }

/// Trapezoid-free integral of exp(-sum phi) for phi = a sqrt(1 + x^2), d = 1,
/// on a wide midpoint grid.
inline double softabs_partition_1d(double a) {
  const double L = 60.0 / a;
  const int n = 400000;
  const double h = 2.0 * L / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -L + (i + 0.5) * h;
    s += std::exp(-a * std::sqrt(1.0 + x * x)) * h;
  }
  return s;
}

/// Sample mean and standard error.
inline std::pair<double, double> mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (v.size() - 1) / v.size())};
}

}  // namespace oracle
