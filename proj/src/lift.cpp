#include "mflow/lift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mflow/errors.hpp"
#include "mflow/kernels.hpp"

namespace mflow {

const char* mode_name(Mode m) { return m == Mode::M ? "M" : "P"; }

GridDensity push_forward(const CoeffVector& c, const SpectralBasis& basis, Mode mode) {
  return mode == Mode::M ? push_forward_M(c, basis) : push_forward_P(c, basis);
}

LiftedCylinder lift(const CylinderFunction& u, const SpectralBasis& basis) {
  LiftedCylinder L;
  L.bound = bind(u, basis.grid());
  const std::size_t M = basis.n_nodes();
  const auto& k = kernels::active();
  for (const Vec& wf : L.bound.WF) {
    Vec dg(basis.n_modes());
    for (std::size_t n = 0; n < dg.size(); ++n) dg[n] = k.dot3(wf.data(), basis.mode_row(n), basis.mode_row(n), M);
    L.diag.push_back(std::move(dg));
  }
  return L;
}

namespace {

double norm2(const CoeffVector& c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return s;
}

double lift_rho(const CoeffVector& c, Mode mode) {
  if (mode == Mode::M) return 1.0;
  const double r = norm2(c);
  if (!(r > kDegenerateNorm2)) throw DegenerateInput("P-mode lift is undefined at |c| ~ 0");
  return r;
}

}  // namespace

LiftEval evaluate(const LiftedCylinder& u, const SpectralBasis& basis, const CoeffVector& c, Mode mode,
                  int order) {
  if (c.size() != basis.n_modes()) throw DimensionMismatch("coefficient vector has wrong length");
  const auto& k = kernels::active();
  const std::size_t M = basis.n_nodes();
  const std::size_t N = basis.n_modes();
  const int J = u.bound.arity();
  const double rho = lift_rho(c, mode);

  Vec f(M);
  basis.synthesize(c.data(), f.data());

  LiftEval out;
  out.y.resize(J);
  for (int j = 0; j < J; ++j) out.y[j] = k.dot3(u.bound.WF[j].data(), f.data(), f.data(), M) / rho;
  out.value = u.bound.u.outer.value(out.y.data());
  if (order < 1) return out;

  Vec g(J);
  u.bound.u.outer.grad(out.y.data(), g.data());
  out.D.assign(M, 0.0);
  double shift = 0.0;
  for (int j = 0; j < J; ++j) {
    k.axpy(g[j], u.bound.F[j].data(), out.D.data(), M);
    shift += g[j] * out.y[j];
  }
  if (mode == Mode::P)
    for (double& v : out.D) v -= shift;

  Vec fD(M), scratch(M);
  k.mul(f.data(), out.D.data(), fD.data(), M);
  out.grad.resize(N);
  basis.project(fD.data(), out.grad.data(), scratch.data());
  for (double& v : out.grad) v *= 2.0 / rho;
  if (order < 2) return out;

  // dy[j][n] = d y_j / d c_n
  std::vector<Vec> dy(J, Vec(N));
  Vec fF(M);
  for (int j = 0; j < J; ++j) {
    k.mul(f.data(), u.bound.F[j].data(), fF.data(), M);
    basis.project(fF.data(), dy[j].data(), scratch.data());
    for (std::size_t n = 0; n < N; ++n)
      dy[j][n] = mode == Mode::M ? 2.0 * dy[j][n] : 2.0 * (dy[j][n] - out.y[j] * c[n]) / rho;
  }
  Vec H(static_cast<std::size_t>(J) * J);
  u.bound.u.outer.hess(out.y.data(), H.data());
  double lap = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    double t = 0.0;
    for (int a = 0; a < J; ++a) {
      for (int b = 0; b < J; ++b) t += H[a * J + b] * dy[a][n] * dy[b][n];
      const double d2 = mode == Mode::M ? 2.0 * u.diag[a][n]
                                        : (2.0 / rho) * (u.diag[a][n] - out.y[a] - 2.0 * c[n] * dy[a][n]);
      t += g[a] * d2;
    }
    lap += t;
  }
  out.laplacian = lap;
  return out;
}

Vec full_gradient(const SpectralBasis& basis, const Vec& f, const Vec& D, double rho) {
  Vec fD(f.size());
  kernels::active().mul(f.data(), D.data(), fD.data(), f.size());
  Vec a = basis.project_full(fD);
  for (double& v : a) v *= 2.0 / rho;
  return a;
}

double potential_value(const BoundPotential& pot, const SpectralBasis& basis, const CoeffVector& c, Mode mode) {
  if (pot.pot.is_none()) return 0.0;
  return eval_beta(pot, push_forward(c, basis, mode));
}

CoeffVector potential_gradient(const BoundPotential& pot, const SpectralBasis& basis, const CoeffVector& c,
                               Mode mode) {
  const std::size_t N = basis.n_modes();
  CoeffVector grad(N, 0.0);
  if (pot.pot.is_none()) return grad;
  const double rho = lift_rho(c, mode);
  const std::size_t M = basis.n_nodes();
  Vec f(M);
  basis.synthesize(c.data(), f.data());
  // payload g_i = f_i (q'(f_i^2 / rho) + phi_i), zero in q' below the cutoff.
  Vec g(M);
  const bool has_phi = !pot.phi.empty();
  for (std::size_t i = 0; i < M; ++i) {
    const double x = f[i];
    double v = 0.0;
    if (pot.pot.q_prime && std::fabs(x) >= kPayloadCutoff) v = x * pot.pot.q_prime(std::max(x * x / rho, kQPrimeFloor));
    if (has_phi) v += x * pot.phi[i];
    if (!std::isfinite(v))
      throw NumericalError("non-finite drift payload at node " + std::to_string(i) + " (x = " +
                           std::to_string(basis.grid()->nodes[i][0]) + ")");
    g[i] = v;
  }
  basis.project(g.data(), grad.data());
  if (mode == Mode::M) {
    for (double& v : grad) v *= 2.0;
  } else {
    const double m = kernels::active().dot3(basis.weights().data(), f.data(), g.data(), M) / rho;
    for (std::size_t n = 0; n < N; ++n) grad[n] = 2.0 * (grad[n] - m * c[n]) / rho;
  }
  return grad;
}

double carre_du_champ(const LiftedCylinder& u, const LiftedCylinder& v, const SpectralBasis& basis,
                      const CoeffVector& c, Mode mode) {
  const LiftEval eu = evaluate(u, basis, c, mode, 1);
  const LiftEval ev = evaluate(v, basis, c, mode, 1);
  const GridDensity mu = push_forward(c, basis, mode);
  Vec prod(mu.h.size());
  kernels::active().mul(eu.D.data(), ev.D.data(), prod.data(), prod.size());
  return integrate_against(mu, prod);
}

double truncated_gamma(const LiftEval& u, const LiftEval& v, const CoeffVector& c, Mode mode) {
  const double w = mode == Mode::M ? 1.0 : norm2(c);
  return 0.25 * w * kernels::active().dot(u.grad.data(), v.grad.data(), u.grad.size());
}

}  // namespace mflow
