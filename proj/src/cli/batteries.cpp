#include "mflow/cli/batteries.hpp"

#include <cmath>

namespace mflow::cli {

namespace {

MultiIndex hermite_index(int d, int n0, int n1 = 0) {
  if (d == 1) return {n0 + n1};
  return {n0, n1};
}

Point at(double x, double y = 0.0) { return Point{x, y}; }

ScalarFunction f1(std::string name, std::function<double(double)> v, std::function<double(double)> g) {
  ScalarFunction s;
  s.name = std::move(name);
  s.dim = 1;
  s.value = [v](const double* x) { return v(x[0]); };
  s.grad = [g](const double* x, double* out) { out[0] = g(x[0]); };
  return s;
}

ScalarFunction f2(std::string name, std::function<double(double, double)> v,
                  std::function<void(double, double, double*)> g) {
  ScalarFunction s;
  s.name = std::move(name);
  s.dim = 2;
  s.value = [v](const double* x) { return v(x[0], x[1]); };
  s.grad = [g](const double* x, double* out) { g(x[0], x[1], out); };
  return s;
}

}  // namespace

std::vector<CylinderFunction> cylinder_battery(int d) {
  std::vector<CylinderFunction> out;
  out.push_back({{test_hermite(hermite_index(d, 0))}, outer_sin()});
  out.push_back({{test_gaussian(at(0.5, -0.25), 1.0, d)}, outer_tanh()});
  out.push_back({{test_tanh_window(-1.0, 1.0, 0.5)}, outer_gauss_bump()});
  out.push_back({{test_hermite(hermite_index(d, 1)), test_gaussian(at(-0.5, 0.5), 0.7, d)}, outer_sin_cos()});
  out.push_back({{test_hermite(hermite_index(d, 0)), test_hermite(hermite_index(d, 0, 2)),
                  test_gaussian(at(1.0, 0.0), 1.5, d)},
                 outer_tanh_sum({0.7, -0.4, 0.2})});
  return out;
}

std::vector<std::pair<CylinderFunction, CylinderFunction>> ibp_pairs(int d) {
  const auto b = cylinder_battery(d);
  return {{b[0], b[1]}, {b[1], b[2]}, {b[3], b[0]}, {b[4], b[3]}};
}

std::vector<ScalarFunction> lsi_battery() {
  std::vector<ScalarFunction> v;
  v.push_back(f1("const", [](double) { return 1.0; }, [](double) { return 0.0; }));
  v.push_back(f1("exp(0.3x)", [](double x) { return std::exp(0.3 * x); },
                 [](double x) { return 0.3 * std::exp(0.3 * x); }));
  v.push_back(f1("exp(-0.8x)", [](double x) { return std::exp(-0.8 * x); },
                 [](double x) { return -0.8 * std::exp(-0.8 * x); }));
  v.push_back(f1("1+0.5x", [](double x) { return 1.0 + 0.5 * x; }, [](double) { return 0.5; }));
  v.push_back(f1("2+sin(x)", [](double x) { return 2.0 + std::sin(x); }, [](double x) { return std::cos(x); }));
  v.push_back(f1("1.5+cos(2x)", [](double x) { return 1.5 + std::cos(2.0 * x); },
                 [](double x) { return -2.0 * std::sin(2.0 * x); }));
  v.push_back(f1("sqrt(1+x^2)", [](double x) { return std::sqrt(1.0 + x * x); },
                 [](double x) { return x / std::sqrt(1.0 + x * x); }));
  v.push_back(f1("cosh(0.5x)", [](double x) { return std::cosh(0.5 * x); },
                 [](double x) { return 0.5 * std::sinh(0.5 * x); }));
  v.push_back(f1("1+exp(-x^2)", [](double x) { return 1.0 + std::exp(-x * x); },
                 [](double x) { return -2.0 * x * std::exp(-x * x); }));
  v.push_back(f1("3+tanh(2x)", [](double x) { return 3.0 + std::tanh(2.0 * x); },
                 [](double x) { return 2.0 / (std::cosh(2.0 * x) * std::cosh(2.0 * x)); }));
  v.push_back(f1("x^2+0.1", [](double x) { return x * x + 0.1; }, [](double x) { return 2.0 * x; }));
  v.push_back(f1("0.2+1/(1+x^2)", [](double x) { return 0.2 + 1.0 / (1.0 + x * x); },
                 [](double x) { return -2.0 * x / ((1.0 + x * x) * (1.0 + x * x)); }));
  v.push_back(f2(
      "exp(0.3x-0.2y)", [](double x, double y) { return std::exp(0.3 * x - 0.2 * y); },
      [](double x, double y, double* g) {
        const double e = std::exp(0.3 * x - 0.2 * y);
        g[0] = 0.3 * e;
        g[1] = -0.2 * e;
      }));
  v.push_back(f2(
      "2+sin(x)cos(y)", [](double x, double y) { return 2.0 + std::sin(x) * std::cos(y); },
      [](double x, double y, double* g) {
        g[0] = std::cos(x) * std::cos(y);
        g[1] = -std::sin(x) * std::sin(y);
      }));
  v.push_back(f2(
      "sqrt(1+x^2+2y^2)", [](double x, double y) { return std::sqrt(1.0 + x * x + 2.0 * y * y); },
      [](double x, double y, double* g) {
        const double r = std::sqrt(1.0 + x * x + 2.0 * y * y);
        g[0] = x / r;
        g[1] = 2.0 * y / r;
      }));
  v.push_back(f2(
      "1+0.5x+0.25y", [](double x, double y) { return 1.0 + 0.5 * x + 0.25 * y; },
      [](double, double, double* g) {
        g[0] = 0.5;
        g[1] = 0.25;
      }));
  v.push_back(f2(
      "1+exp(-x^2-y^2)", [](double x, double y) { return 1.0 + std::exp(-x * x - y * y); },
      [](double x, double y, double* g) {
        const double e = std::exp(-x * x - y * y);
        g[0] = -2.0 * x * e;
        g[1] = -2.0 * y * e;
      }));
  v.push_back(f2(
      "3+tanh(x+y)", [](double x, double y) { return 3.0 + std::tanh(x + y); },
      [](double x, double y, double* g) {
        const double c = std::cosh(x + y);
        g[0] = g[1] = 1.0 / (c * c);
      }));
  v.push_back(f2(
      "cosh(0.4x)cosh(0.3y)", [](double x, double y) { return std::cosh(0.4 * x) * std::cosh(0.3 * y); },
      [](double x, double y, double* g) {
        g[0] = 0.4 * std::sinh(0.4 * x) * std::cosh(0.3 * y);
        g[1] = 0.3 * std::cosh(0.4 * x) * std::sinh(0.3 * y);
      }));
  v.push_back(f2(
      "2+sin(x+2y)", [](double x, double y) { return 2.0 + std::sin(x + 2.0 * y); },
      [](double x, double y, double* g) {
        g[0] = std::cos(x + 2.0 * y);
        g[1] = 2.0 * std::cos(x + 2.0 * y);
      }));
  return v;
}

std::vector<HyperCase> hyper_battery() {
  auto zero = [](double) { return 0.0; };
  const ScalarFunction a = f1("2+sin(3x)", [](double x) { return 2.0 + std::sin(3.0 * x); }, zero);
  const ScalarFunction b = f1("1+exp(-x^2)", [](double x) { return 1.0 + std::exp(-x * x); }, zero);
  const ScalarFunction c = f1("3+tanh(4x)", [](double x) { return 3.0 + std::tanh(4.0 * x); }, zero);
  const ScalarFunction e = f1("exp(x)", [](double x) { return std::exp(x); }, zero);
  const ScalarFunction s = f1("sign-like tanh(8x)", [](double x) { return std::tanh(8.0 * x); }, zero);
  return {{a, 0.0, 2.0}, {a, 0.5, 2.0}, {b, 0.1, 1.5}, {b, 1.0, 3.0}, {c, 0.25, 2.0},
          {c, 2.0, 4.0}, {e, 0.5, 2.0}, {e, 0.05, 1.2}, {s, 0.2, 2.0}, {s, 1.0, 1.5}};
}

}  // namespace mflow::cli
