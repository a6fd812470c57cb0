#include "mflow/dirichlet.hpp"

#include <algorithm>
#include <cmath>

#include "mflow/errors.hpp"
#include "mflow/kernels.hpp"

namespace mflow {

FormKind parse_form_kind(const std::string& s) {
  if (s == "diffusion_M") return FormKind::DiffusionM;
  if (s == "diffusion_P") return FormKind::DiffusionP;
  if (s == "diffusion_A") return FormKind::DiffusionA;
  if (s == "jump") return FormKind::Jump;
  if (s == "killing") return FormKind::Killing;
  throw ConfigError("unknown form kind '" + s + "'");
}

const char* form_kind_name(FormKind k) {
  switch (k) {
    case FormKind::DiffusionM: return "diffusion_M";
    case FormKind::DiffusionP: return "diffusion_P";
    case FormKind::DiffusionA: return "diffusion_A";
    case FormKind::Jump: return "jump";
    case FormKind::Killing: return "killing";
  }
  return "?";
}

JumpKernel jump_constant(double c) {
  if (!(c >= 0.0)) throw ConfigError("jump density must be >= 0");
  return [c](const GridDensity&, const GridDensity&) { return c; };
}

JumpKernel jump_mass_gap(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("mass-gap kernel needs sigma > 0");
  return [sigma](const GridDensity& a, const GridDensity& b) {
    const double g = a.mass - b.mass;
    return std::exp(-g * g / (2.0 * sigma * sigma));
  };
}

KillingFn killing_saturating_mass(double a) {
  if (!(a >= 0.0)) throw ConfigError("killing rate must be >= 0");
  return [a](const GridDensity& mu) { return a * mu.mass / (1.0 + mu.mass); };
}

std::pair<double, double> FormSpec::k_bounds() const {
  double lo = k_tail, hi = k_tail;
  for (double k : K_eigenvalues) {
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  return {lo, hi};
}

void FormSpec::validate(const SpectralBasis& basis) const {
  if (kind == FormKind::Jump && !jump) throw ConfigError("jump form needs a jump kernel");
  if (kind == FormKind::Killing && !killing) throw ConfigError("killing form needs a killing function");
  if (kind == FormKind::DiffusionA) {
    if (K_eigenvalues.size() != basis.n_modes())
      throw ConfigError("diffusion_A needs one K eigenvalue per retained mode");
    if (!(k_bounds().first > 0.0)) throw ConfigError("K eigenvalues must be positive");
  }
  if (p < 0.0) throw ConfigError("p must be >= 0");
}

namespace {

double gamma_from_derivatives(const GridDensity& mu, const Vec& Du, const Vec& Dv) {
  Vec prod(mu.h.size());
  kernels::active().mul(Du.data(), Dv.data(), prod.data(), prod.size());
  return integrate_against(mu, prod);
}

}  // namespace

FormSamples form_samples(const GaussianSpec& spec, const FormSpec& form, const CylinderFunction& u,
                         const CylinderFunction& v, std::size_t n, const SampleOptions& opt) {
  const SpectralBasis& basis = *spec.basis;
  form.validate(basis);
  const LiftedCylinder lu = lift(u, basis);
  const LiftedCylinder lv = lift(v, basis);
  Mode mode = form.mode;
  if (form.kind == FormKind::DiffusionM || form.kind == FormKind::DiffusionA) mode = Mode::M;
  if (form.kind == FormKind::DiffusionP) mode = Mode::P;
  const Tilt tilt = make_tilt(form.tilt, basis, form.p, mode);

  FormSamples out;
  out.log_weights.resize(n);
  out.values.resize(n);
  for_each_chunk(n, opt.exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (form.kind == FormKind::Jump) {
        const CoeffVector a = sample_g(spec, opt.seed, 2 * i, streams::kGaussianPair);
        const CoeffVector b = sample_g(spec, opt.seed, 2 * i + 1, streams::kGaussianPair);
        out.log_weights[i] = gibbs_weight(a, basis, tilt).log_weight() + gibbs_weight(b, basis, tilt).log_weight();
        if (!std::isfinite(out.log_weights[i])) {
          out.values[i] = 0.0;
          continue;
        }
        const GridDensity ga = push_forward(a, basis, mode);
        const GridDensity gb = push_forward(b, basis, mode);
        const double du = eval_cylinder(lu.bound, ga) - eval_cylinder(lu.bound, gb);
        const double dv = eval_cylinder(lv.bound, ga) - eval_cylinder(lv.bound, gb);
        out.values[i] = form.jump(ga, gb) * du * dv;
        continue;
      }
      const CoeffVector c = sample_g(spec, opt.seed, i, opt.stream);
      out.log_weights[i] = gibbs_weight(c, basis, tilt).log_weight();
      if (!std::isfinite(out.log_weights[i])) {
        out.values[i] = 0.0;
        continue;
      }
      switch (form.kind) {
        case FormKind::DiffusionM:
        case FormKind::DiffusionP:
          out.values[i] = carre_du_champ(lu, lv, basis, c, mode);
          break;
        case FormKind::DiffusionA:
          out.values[i] = a_form_value(lu, lv, basis, c, form.K_eigenvalues, form.k_tail);
          break;
        case FormKind::Killing: {
          const GridDensity mu = push_forward(c, basis, mode);
          out.values[i] = eval_cylinder(lu.bound, mu) * eval_cylinder(lv.bound, mu) * form.killing(mu);
          break;
        }
        case FormKind::Jump:
          break;
      }
    }
  });
  return out;
}

MCEstimate estimate_form(const GaussianSpec& spec, const FormSpec& form, const CylinderFunction& u,
                         const CylinderFunction& v, std::size_t n, const SampleOptions& opt) {
  if (n < 100) throw ConfigError("estimate_form needs n >= 100");
  const FormSamples s = form_samples(spec, form, u, v, n, opt);
  return weighted_estimate(s.log_weights, s.values);
}

Vec apply_A(const GridDensity& mu, const Vec& g, const SpectralBasis& basis, const Vec& K_eigenvalues,
            double k_tail) {
  require_same_grid(mu.grid, basis.grid());
  if (g.size() != mu.h.size()) throw GridMismatch("grid function has wrong length");
  if (K_eigenvalues.size() != basis.n_modes()) throw DimensionMismatch("one K eigenvalue per retained mode");
  const std::size_t M = g.size();
  Vec root(M), gr(M);
  for (std::size_t i = 0; i < M; ++i) {
    root[i] = std::sqrt(mu.h[i]);
    gr[i] = g[i] * root[i];
  }
  Vec a = basis.project_full(gr);
  Vec scale(a.size(), k_tail);
  for (std::size_t n = 0; n < basis.n_modes(); ++n) scale[basis.full_index(n)] = K_eigenvalues[n];
  for (std::size_t m = 0; m < a.size(); ++m) a[m] *= scale[m];
  Vec out = basis.synthesize_full(a);
  for (std::size_t i = 0; i < M; ++i) out[i] = root[i] > 0.0 ? out[i] / root[i] : 0.0;
  return out;
}

double a_form_value(const LiftedCylinder& u, const LiftedCylinder& v, const SpectralBasis& basis,
                    const CoeffVector& c, const Vec& K_eigenvalues, double k_tail) {
  const LiftEval eu = evaluate(u, basis, c, Mode::M, 1);
  const LiftEval ev = evaluate(v, basis, c, Mode::M, 1);
  const GridDensity mu = push_forward_M(c, basis);
  const double gamma = gamma_from_derivatives(mu, eu.D, ev.D);
  const std::size_t M = basis.n_nodes();
  Vec f(M), fu(M), fv(M);
  basis.synthesize(c.data(), f.data());
  for (std::size_t i = 0; i < M; ++i) {
    const double r = std::fabs(f[i]);
    fu[i] = r * eu.D[i];
    fv[i] = r * ev.D[i];
  }
  const CoeffVector a = basis.project(fu);
  const CoeffVector b = basis.project(fv);
  double corr = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) corr += (K_eigenvalues[n] - k_tail) * (a[n] * b[n]);
  return k_tail * gamma + corr;
}

double chain_rule_residual(const LiftedCylinder& u, const SpectralBasis& basis, const CoeffVector& c,
                           double step, Mode mode) {
  if (!(step >= 1e-6 && step <= 1e-2)) throw ConfigError("chain-rule step must lie in [1e-6, 1e-2]");
  const LiftEval e = evaluate(u, basis, c, mode, 1);
  double worst = 0.0;
  CoeffVector cp = c;
  for (std::size_t n = 0; n < c.size(); ++n) {
    cp[n] = c[n] + step;
    const double up = evaluate(u, basis, cp, mode, 0).value;
    cp[n] = c[n] - step;
    const double um = evaluate(u, basis, cp, mode, 0).value;
    cp[n] = c[n];
    worst = std::max(worst, std::fabs((up - um) / (2.0 * step) - e.grad[n]));
  }
  return worst;
}

double quarter_identity_residual(const LiftedCylinder& u, const LiftedCylinder& v, const SpectralBasis& basis,
                                 const CoeffVector& c, Mode mode) {
  const LiftEval eu = evaluate(u, basis, c, mode, 1);
  const LiftEval ev = evaluate(v, basis, c, mode, 1);
  const GridDensity mu = push_forward(c, basis, mode);
  const double lhs = gamma_from_derivatives(mu, eu.D, ev.D);
  double rho = 1.0;
  if (mode == Mode::P) {
    rho = 0.0;
    for (double x : c) rho += x * x;
  }
  const Vec f = basis.synthesize(c);
  const Vec gu = full_gradient(basis, f, eu.D, rho);
  const Vec gv = full_gradient(basis, f, ev.D, rho);
  double dot = 0.0;
  for (std::size_t m = 0; m < gu.size(); ++m) dot += gu[m] * gv[m];
  const double rhs = 0.25 * rho * dot;
  return std::fabs(lhs - rhs);
}

double apply_generator(const LiftEval& eu, const GaussianSpec& spec, const Tilt& tilt, const CoeffVector& c,
                       const CoeffVector& grad_v) {
  double n2 = 0.0;
  for (double x : c) n2 += x * x;
  double drift = 0.0, radial = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double inv_var = 1.0 / (spec.s[n] * spec.s[n]);
    drift += (inv_var * c[n] + grad_v[n]) * eu.grad[n];
    radial += c[n] * eu.grad[n];
  }
  if (tilt.mode == Mode::M) {
    const double pterm = tilt.p == 0.0 ? 0.0 : tilt.p * radial / n2;
    return 0.25 * (eu.laplacian - drift + pterm);
  }
  return 0.25 * (n2 * (eu.laplacian - drift) + (tilt.p + 2.0) * radial);
}

double apply_generator(const LiftedCylinder& u, const GaussianSpec& spec, const Tilt& tilt, const CoeffVector& c) {
  const LiftEval eu = evaluate(u, *spec.basis, c, tilt.mode, 2);
  const CoeffVector gv = potential_gradient(tilt.pot, *spec.basis, c, tilt.mode);
  return apply_generator(eu, spec, tilt, c, gv);
}

MCEstimate ibp_residual(const GaussianSpec& spec, const Tilt& tilt, const CylinderFunction& u,
                        const CylinderFunction& v, std::size_t n, const SampleOptions& opt) {
  if (n < 10000) throw ConfigError("ibp_residual needs n >= 1e4");
  const SpectralBasis& basis = *spec.basis;
  const LiftedCylinder lu = lift(u, basis);
  const LiftedCylinder lv = lift(v, basis);
  Vec logw(n), vals(n);
  for_each_chunk(n, opt.exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const CoeffVector c = sample_g(spec, opt.seed, i, opt.stream);
      logw[i] = gibbs_weight(c, basis, tilt).log_weight();
      if (!std::isfinite(logw[i])) {
        vals[i] = 0.0;
        continue;
      }
      const LiftEval eu = evaluate(lu, basis, c, tilt.mode, 2);
      const LiftEval ev = evaluate(lv, basis, c, tilt.mode, 1);
      const CoeffVector gv = potential_gradient(tilt.pot, basis, c, tilt.mode);
      vals[i] = truncated_gamma(eu, ev, c, tilt.mode) + ev.value * apply_generator(eu, spec, tilt, c, gv);
    }
  });
  return weighted_estimate(logw, vals);
}

JumpBoundReport jump_bound_check(const CylinderFunction& u,
                                 const std::vector<std::pair<GridDensity, GridDensity>>& pairs, Mode mode,
                                 double tol) {
  JumpBoundReport r;
  r.bound_constant = 2.0 * u.outer.sup_value + derivative_sup_bound(u, mode == Mode::P);
  for (const auto& [a, b] : pairs) {
    const BoundCylinder bu = bind(u, a.grid);
    const double diff = std::fabs(eval_cylinder(bu, a) - eval_cylinder(bu, b));
    const double rv = tv_distance(a, b);
    const double bound = std::min(1.0, rv) * r.bound_constant;
    const double slack = bound - diff;
    r.worst_slack = std::min(r.worst_slack, slack);
    if (slack < -tol) ++r.violations;
    ++r.pairs;
  }
  return r;
}

}  // namespace mflow
