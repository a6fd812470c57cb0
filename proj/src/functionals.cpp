#include "mflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "mflow/errors.hpp"
#include "mflow/kernels.hpp"

namespace mflow {

// ---------------------------------------------------------------- test functions

TestFunction test_constant(double value) {
  return {"constant", [value](const Point&) { return value; }, std::fabs(value)};
}

TestFunction test_hermite(const MultiIndex& n) {
  if (n.empty() || n.size() > 2) throw ConfigError("hermite test function needs 1 or 2 indices");
  const MultiIndex idx = n;
  std::string name = "hermite(" + std::to_string(n[0]) + (n.size() == 2 ? "," + std::to_string(n[1]) : "") + ")";
  const double sup = std::pow(std::numbers::pi, -0.25 * static_cast<double>(n.size()));
  return {name,
          [idx](const Point& x) {
            double v = hermite_eval(idx[0], x[0]);
            if (idx.size() == 2) v *= hermite_eval(idx[1], x[1]);
            return v;
          },
          sup};
}

TestFunction test_gaussian(const Point& center, double width, int d) {
  if (!(width > 0.0)) throw ConfigError("gaussian test function needs width > 0");
  return {"gaussian",
          [center, width, d](const Point& x) {
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) r2 += (x[k] - center[k]) * (x[k] - center[k]);
            return std::exp(-r2 / (2.0 * width * width));
          },
          1.0};
}

TestFunction test_tanh_window(double a, double b, double width) {
  if (!(b > a) || !(width > 0.0)) throw ConfigError("tanh window needs a < b and width > 0");
  return {"tanh_window",
          [a, b, width](const Point& x) {
            return 0.5 * (std::tanh((x[0] - a) / width) - std::tanh((x[0] - b) / width));
          },
          1.0};
}

// ---------------------------------------------------------------- outer maps

OuterMap outer_identity() { return outer_linear({1.0}); }

OuterMap outer_linear(std::vector<double> a) {
  OuterMap g;
  g.name = "linear";
  g.arity = static_cast<int>(a.size());
  g.value = [a](const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * y[i];
    return s;
  };
  g.grad = [a](const double*, double* out) { std::copy(a.begin(), a.end(), out); };
  g.hess = [n = a.size()](const double*, double* out) { std::fill(out, out + n * n, 0.0); };
  for (double v : a) g.sup_grad.push_back(std::fabs(v));
  return g;
}

OuterMap outer_constant(double v, int arity) {
  OuterMap g;
  g.name = "constant";
  g.arity = arity;
  g.value = [v](const double*) { return v; };
  g.grad = [arity](const double*, double* out) { std::fill(out, out + arity, 0.0); };
  g.hess = [arity](const double*, double* out) { std::fill(out, out + arity * arity, 0.0); };
  g.sup_value = std::fabs(v);
  g.sup_grad.assign(arity, 0.0);
  return g;
}

OuterMap outer_sin() {
  OuterMap g;
  g.name = "sin";
  g.value = [](const double* y) { return std::sin(y[0]); };
  g.grad = [](const double* y, double* out) { out[0] = std::cos(y[0]); };
  g.hess = [](const double* y, double* out) { out[0] = -std::sin(y[0]); };
  g.sup_value = 1.0;
  g.sup_grad = {1.0};
  return g;
}

OuterMap outer_tanh() { return outer_tanh_sum({1.0}); }

OuterMap outer_gauss_bump() {
  OuterMap g;
  g.name = "gauss_bump";
  g.value = [](const double* y) { return std::exp(-y[0] * y[0]); };
  g.grad = [](const double* y, double* out) { out[0] = -2.0 * y[0] * std::exp(-y[0] * y[0]); };
  g.hess = [](const double* y, double* out) {
    out[0] = (4.0 * y[0] * y[0] - 2.0) * std::exp(-y[0] * y[0]);
  };
  g.sup_value = 1.0;
  g.sup_grad = {std::sqrt(2.0 / std::numbers::e)};
  return g;
}

OuterMap outer_product() {
  OuterMap g;
  g.name = "product";
  g.arity = 2;
  g.value = [](const double* y) { return y[0] * y[1]; };
  g.grad = [](const double* y, double* out) {
    out[0] = y[1];
    out[1] = y[0];
  };
  g.hess = [](const double*, double* out) {
    out[0] = 0.0;
    out[1] = 1.0;
    out[2] = 1.0;
    out[3] = 0.0;
  };
  g.sup_grad = {kInf, kInf};
  return g;
}

OuterMap outer_tanh_sum(std::vector<double> a) {
  OuterMap g;
  g.name = a.size() == 1 && a[0] == 1.0 ? "tanh" : "tanh_sum";
  g.arity = static_cast<int>(a.size());
  auto arg = [a](const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * y[i];
    return s;
  };
  g.value = [arg](const double* y) { return std::tanh(arg(y)); };
  g.grad = [a, arg](const double* y, double* out) {
    const double t = std::tanh(arg(y));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * (1.0 - t * t);
  };
  g.hess = [a, arg](const double* y, double* out) {
    const double t = std::tanh(arg(y));
    const double s2 = -2.0 * t * (1.0 - t * t);
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a[i] * a[j] * s2;
  };
  g.sup_value = 1.0;
  for (double v : a) g.sup_grad.push_back(std::fabs(v));
  return g;
}

OuterMap outer_sin_cos() {
  OuterMap g;
  g.name = "sin_cos";
  g.arity = 2;
  g.value = [](const double* y) { return std::sin(y[0]) * std::cos(y[1]); };
  g.grad = [](const double* y, double* out) {
    out[0] = std::cos(y[0]) * std::cos(y[1]);
    out[1] = -std::sin(y[0]) * std::sin(y[1]);
  };
  g.hess = [](const double* y, double* out) {
    out[0] = -std::sin(y[0]) * std::cos(y[1]);
    out[1] = -std::cos(y[0]) * std::sin(y[1]);
    out[2] = out[1];
    out[3] = -std::sin(y[0]) * std::cos(y[1]);
  };
  g.sup_value = 1.0;
  g.sup_grad = {1.0, 1.0};
  return g;
}

// ---------------------------------------------------------------- cylinders

void CylinderFunction::validate() const {
  if (outer.arity < 1) throw ConfigError("outer map needs arity >= 1");
  if (static_cast<int>(inner.size()) != outer.arity)
    throw ConfigError("cylinder: outer arity " + std::to_string(outer.arity) + " but " +
                      std::to_string(inner.size()) + " inner functions");
  if (!outer.value || !outer.grad || !outer.hess) throw ConfigError("outer map is incomplete");
  if (static_cast<int>(outer.sup_grad.size()) != outer.arity)
    throw ConfigError("outer map needs one gradient bound per argument");
}

CylinderFunction compose(const OuterMap& g, const std::vector<CylinderFunction>& parts) {
  if (static_cast<int>(parts.size()) != g.arity) throw ConfigError("compose: arity mismatch");
  CylinderFunction out;
  std::vector<int> offset;
  int total = 0;
  for (const auto& p : parts) {
    p.validate();
    offset.push_back(total);
    total += p.outer.arity;
    out.inner.insert(out.inner.end(), p.inner.begin(), p.inner.end());
  }
  auto shared = std::make_shared<const std::vector<CylinderFunction>>(parts);
  const int m = g.arity;

  OuterMap G;
  G.name = "compose(" + g.name + ")";
  G.arity = total;
  G.value = [g, shared, offset, m](const double* y) {
    std::vector<double> U(m);
    for (int p = 0; p < m; ++p) U[p] = (*shared)[p].outer.value(y + offset[p]);
    return g.value(U.data());
  };
  G.grad = [g, shared, offset, m](const double* y, double* out) {
    std::vector<double> U(m), gU(m);
    for (int p = 0; p < m; ++p) U[p] = (*shared)[p].outer.value(y + offset[p]);
    g.grad(U.data(), gU.data());
    for (int p = 0; p < m; ++p) {
      (*shared)[p].outer.grad(y + offset[p], out + offset[p]);
      for (int i = 0; i < (*shared)[p].outer.arity; ++i) out[offset[p] + i] *= gU[p];
    }
  };
  G.hess = [g, shared, offset, m, total](const double* y, double* out) {
    std::vector<double> U(m), gU(m), hU(m * m), dU(total);
    for (int p = 0; p < m; ++p) {
      U[p] = (*shared)[p].outer.value(y + offset[p]);
      (*shared)[p].outer.grad(y + offset[p], dU.data() + offset[p]);
    }
    g.grad(U.data(), gU.data());
    g.hess(U.data(), hU.data());
    std::fill(out, out + total * total, 0.0);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        const int ap = (*shared)[p].outer.arity, aq = (*shared)[q].outer.arity;
        for (int i = 0; i < ap; ++i)
          for (int j = 0; j < aq; ++j)
            out[(offset[p] + i) * total + offset[q] + j] +=
                hU[p * m + q] * dU[offset[p] + i] * dU[offset[q] + j];
      }
    for (int p = 0; p < m; ++p) {
      const int ap = (*shared)[p].outer.arity;
      std::vector<double> h(ap * ap);
      (*shared)[p].outer.hess(y + offset[p], h.data());
      for (int i = 0; i < ap; ++i)
        for (int j = 0; j < ap; ++j) out[(offset[p] + i) * total + offset[p] + j] += gU[p] * h[i * ap + j];
    }
  };
  G.sup_value = g.sup_value;
  for (int p = 0; p < m; ++p)
    for (double s : parts[p].outer.sup_grad) G.sup_grad.push_back(g.sup_grad[p] * s);
  out.outer = std::move(G);
  return out;
}

double derivative_sup_bound(const CylinderFunction& u, bool centered) {
  u.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < u.inner.size(); ++i) {
    if (u.outer.sup_grad[i] == 0.0) continue;
    s += u.outer.sup_grad[i] * u.inner[i].sup;
  }
  return centered ? 2.0 * s : s;
}

BoundCylinder bind(const CylinderFunction& u, const GridPtr& grid) {
  u.validate();
  BoundCylinder b;
  b.u = u;
  b.grid = grid;
  const std::size_t M = grid->size();
  for (const auto& f : u.inner) {
    Vec v(M), wv(M);
    for (std::size_t i = 0; i < M; ++i) {
      v[i] = f.eval(grid->nodes[i]);
      wv[i] = grid->weights[i] * v[i];
    }
    b.F.push_back(std::move(v));
    b.WF.push_back(std::move(wv));
  }
  return b;
}

Vec inner_values(const BoundCylinder& u, const GridDensity& mu) {
  require_same_grid(u.grid, mu.grid);
  const auto& k = kernels::active();
  Vec y(u.F.size());
  for (std::size_t j = 0; j < u.F.size(); ++j) y[j] = k.dot(u.WF[j].data(), mu.h.data(), mu.h.size());
  return y;
}

double eval_cylinder(const BoundCylinder& u, const GridDensity& mu) {
  const Vec y = inner_values(u, mu);
  return u.u.outer.value(y.data());
}

double eval_cylinder(const CylinderFunction& u, const GridDensity& mu) {
  return eval_cylinder(bind(u, mu.grid), mu);
}

Vec extrinsic_derivative(const BoundCylinder& u, const GridDensity& mu) {
  const Vec y = inner_values(u, mu);
  Vec g(y.size());
  u.u.outer.grad(y.data(), g.data());
  Vec D(mu.h.size(), 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) kernels::active().axpy(g[j], u.F[j].data(), D.data(), D.size());
  return D;
}

Vec extrinsic_derivative(const CylinderFunction& u, const GridDensity& mu) {
  return extrinsic_derivative(bind(u, mu.grid), mu);
}

Vec convexity_derivative(const BoundCylinder& u, const GridDensity& mu) {
  if (!mu.is_probability) throw NotProbability("convexity derivative needs a probability measure");
  const Vec y = inner_values(u, mu);
  Vec g(y.size());
  u.u.outer.grad(y.data(), g.data());
  Vec D(mu.h.size(), 0.0);
  double shift = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    kernels::active().axpy(g[j], u.F[j].data(), D.data(), D.size());
    shift += g[j] * y[j];
  }
  for (double& v : D) v -= shift;
  return D;
}

Vec convexity_derivative(const CylinderFunction& u, const GridDensity& mu) {
  return convexity_derivative(bind(u, mu.grid), mu);
}

// ---------------------------------------------------------------- potentials

PotentialSpec potential_none() { return PotentialSpec{}; }

PotentialSpec potential_entropy() {
  PotentialSpec p;
  p.name = "entropy";
  p.q = [](double s) { return s > 0.0 ? s * std::log(s) - s : 0.0; };
  p.q_prime = [](double s) { return std::log(s); };
  p.theta = 2.0;
  p.c = 2.0;
  return p;
}

PotentialSpec potential_relative_entropy(PhiKind kind, double a, int d) {
  PotentialSpec p;
  p.name = "relative-entropy";
  p.q = [](double s) { return s > 0.0 ? s * std::log(s) : 0.0; };
  p.q_prime = [](double s) { return std::log(s) + 1.0; };
  p.theta = 2.0;
  p.c = 1.0;
  switch (kind) {
    case PhiKind::Zero:
      break;
    case PhiKind::Quadratic:
      if (!(a > 0.0)) throw ConfigError("quadratic phi needs a > 0");
      p.phi = [a](const Point& x) { return a * (x[0] * x[0] + x[1] * x[1]); };
      p.alpha1 = a;
      p.K = a;
      p.c_phi = std::pow(std::numbers::pi / a, 0.5 * d);
      break;
    case PhiKind::SoftAbs:
      if (!(a > 0.0)) throw ConfigError("softabs phi needs a > 0");
      p.phi = [a](const Point& x) { return a * std::sqrt(1.0 + x[0] * x[0] + x[1] * x[1]); };
      p.alpha1 = a;
      p.K = a;
      p.c_phi = d == 1 ? 2.0 * std::cyl_bessel_k(1.0, a)
                       : 2.0 * std::numbers::pi * std::exp(-a) * (1.0 / a + 1.0 / (a * a));
      break;
  }
  return p;
}

PotentialSpec potential_power(double theta) {
  if (!(theta > 1.0)) throw ConfigError("power potential needs theta > 1");
  PotentialSpec p;
  p.name = "power";
  p.q = [theta](double s) { return std::pow(s, theta) / theta; };
  p.q_prime = [theta](double s) { return std::pow(s, theta - 1.0); };
  p.theta = theta;
  p.c = 1.0 / theta;
  return p;
}

PotentialSpec potential_linear(double a) {
  PotentialSpec p;
  p.name = "linear";
  p.q = [a](double s) { return a * s; };
  p.q_prime = [a](double) { return a; };
  p.theta = 2.0;
  p.c = std::max(std::fabs(a), 1e-12);
  return p;
}

PotentialSpec approx_potential(const PotentialSpec& pot, int n) {
  if (n < 1) throw ConfigError("approximation index must be >= 1");
  PotentialSpec p = pot;
  p.name = pot.name + "~" + std::to_string(n);
  const double nn = n;
  if (pot.q) {
    auto q = pot.q;
    auto qp = pot.q_prime;
    p.q = [q, nn](double s) { return q((1.0 + nn * s) / (nn + s)); };
    p.q_prime = [qp, nn](double s) {
      const double r = (1.0 + nn * s) / (nn + s);
      return qp(r) * (nn * nn - 1.0) / ((nn + s) * (nn + s));
    };
  }
  if (pot.phi) {
    auto phi = pot.phi;
    p.phi = [phi, nn](const Point& x) { return std::clamp(phi(x), -nn, nn); };
  }
  p.c_phi.reset();
  return p;
}

double q_prime_guarded(const PotentialSpec& pot, double s) {
  if (!pot.q_prime) return 0.0;
  return pot.q_prime(std::max(s, kQPrimeFloor));
}

double drift_payload(const PotentialSpec& pot, double x) {
  if (!pot.q_prime || std::fabs(x) < kPayloadCutoff) return 0.0;
  return 2.0 * x * pot.q_prime(x * x);
}

CertificateReport check_certificates(const PotentialSpec& pot, double k, int d) {
  CertificateReport r{kInf, kInf, 0.0, 0.0, kInf, true};
  if (pot.q) {
    if (!(pot.theta > 1.0)) r.ok = false;
    for (int e = -240; e <= 120; ++e) {
      const double s = std::pow(10.0, e / 10.0);
      const double q = pot.q(s);
      r.q_lower_slack = std::min(r.q_lower_slack, q + pot.c * std::sqrt(s));
      r.q_upper_slack = std::min(r.q_upper_slack, pot.c * (1.0 + std::pow(s, pot.theta)) - q);
      const double denom = 1.0 / std::sqrt(s) + std::pow(s, pot.theta - 1.0);
      r.q_prime_ratio = std::max(r.q_prime_ratio, std::fabs(pot.q_prime(s)) / denom);
      r.q_prime_sq_ratio = std::max(r.q_prime_sq_ratio, std::fabs(pot.q_prime(s * s)) / denom);
    }
    const double q0 = pot.q(0.0);
    r.q_lower_slack = std::min(r.q_lower_slack, q0);
    r.q_upper_slack = std::min(r.q_upper_slack, pot.c - q0);
    if (r.q_lower_slack < -1e-12 || r.q_upper_slack < -1e-12) r.ok = false;
    if (!std::isfinite(r.q_prime_ratio) || r.q_prime_ratio > 1e6) r.ok = false;
  }
  if (pot.phi) {
    const int n = d == 1 ? 801 : 81;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < (d == 1 ? 1 : n); ++j) {
        Point x{-20.0 + 40.0 * i / (n - 1), d == 1 ? 0.0 : -20.0 + 40.0 * j / (n - 1)};
        const double r1 = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        const double bound = std::min(pot.alpha1 * (1.0 + std::pow(r1, 2.0 * k)), pot.K * (1.0 + std::pow(r1, k)));
        r.phi_slack = std::min(r.phi_slack, bound - std::fabs(pot.phi(x)));
      }
    if (r.phi_slack < -1e-9) r.ok = false;
  }
  return r;
}

void validate_certificates(const PotentialSpec& pot, double k, int d) {
  const CertificateReport r = check_certificates(pot, k, d);
  if (!r.ok)
    throw ConfigError("potential '" + pot.name + "' violates its declared growth certificates (q lower slack " +
                      std::to_string(r.q_lower_slack) + ", q upper slack " + std::to_string(r.q_upper_slack) +
                      ", q' ratio " + std::to_string(r.q_prime_ratio) + ", phi slack " +
                      std::to_string(r.phi_slack) + ")");
}

BoundPotential bind(const PotentialSpec& pot, const GridPtr& grid) {
  BoundPotential b{pot, grid, {}};
  if (pot.phi) {
    b.phi.resize(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) b.phi[i] = pot.phi(grid->nodes[i]);
  }
  return b;
}

double eval_beta(const BoundPotential& pot, const GridDensity& mu) {
  require_same_grid(pot.grid, mu.grid);
  const Vec& W = mu.grid->weights;
  double s = 0.0;
  if (pot.pot.q)
    for (std::size_t i = 0; i < mu.h.size(); ++i) s += W[i] * pot.pot.q(mu.h[i]);
  if (!pot.phi.empty()) s += kernels::active().dot3(W.data(), mu.h.data(), pot.phi.data(), mu.h.size());
  return std::isfinite(s) ? s : kInf;
}

double eval_beta(const PotentialSpec& pot, const GridDensity& mu) { return eval_beta(bind(pot, mu.grid), mu); }

Vec beta_derivative_M(const BoundPotential& pot, const GridDensity& mu) {
  require_same_grid(pot.grid, mu.grid);
  Vec D(mu.h.size(), 0.0);
  for (std::size_t i = 0; i < D.size(); ++i) {
    D[i] = q_prime_guarded(pot.pot, mu.h[i]);
    if (!pot.phi.empty()) D[i] += pot.phi[i];
  }
  return D;
}

Vec beta_derivative_M(const PotentialSpec& pot, const GridDensity& mu) {
  return beta_derivative_M(bind(pot, mu.grid), mu);
}

Vec beta_derivative_P(const BoundPotential& pot, const GridDensity& mu) {
  if (!mu.is_probability) throw NotProbability("beta_derivative_P needs a probability measure");
  Vec D = beta_derivative_M(pot, mu);
  const double m = integrate_against(mu, D) / mu.mass;
  for (double& v : D) v -= m;
  return D;
}

Vec beta_derivative_P(const PotentialSpec& pot, const GridDensity& mu) {
  return beta_derivative_P(bind(pot, mu.grid), mu);
}

}  // namespace mflow
