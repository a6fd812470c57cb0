#include "mflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "mflow/errors.hpp"
#include "mflow/kernels.hpp"

namespace mflow {

Integrator parse_integrator(const std::string& s) {
  if (s == "exact_ou") return Integrator::ExactOU;
  if (s == "euler_maruyama") return Integrator::EulerMaruyama;
  throw ConfigError("unknown integrator '" + s + "' (exact_ou | euler_maruyama)");
}

double FlowConfig::effective_p() const {
  if (p) return *p;
  return mode == Mode::P ? 4.0 * pot.theta : 0.0;
}

void FlowConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("flow dt must be > 0");
  if (static_cast<double>(n_steps) * dt > 1e4) throw ConfigError("flow horizon n_steps * dt exceeds 1e4");
  if (record_every == 0) throw ConfigError("record_every must be >= 1");
  if (n_chains == 0) throw ConfigError("n_chains must be >= 1");
  if (effective_p() < 0.0) throw ConfigError("p must be >= 0");
  if (mode == Mode::P && !pot.is_none()) {
    const auto& sc = spec.basis->config();
    validate_certificates(pot, sc.k, sc.d);
    if (effective_p() < 4.0 * pot.theta) throw ConfigError("P-mode flow needs p >= 4 theta");
  }
}

namespace {

double norm2(const CoeffVector& c) {
  double s = 0.0;
  for (double x : c) s += x * x;
  return s;
}

void ou_coefficients(const GaussianSpec& spec, double dt, Vec& decay, Vec& scale) {
  const std::size_t n = spec.n_modes();
  decay.resize(n);
  scale.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = spec.rate(i) * dt;
    decay[i] = std::exp(-a);
    scale[i] = spec.s[i] * std::sqrt(-std::expm1(-2.0 * a));
  }
}

// Per-chain integrator state.
class Stepper {
 public:
  explicit Stepper(const FlowConfig& cfg)
      : cfg_(cfg), basis_(*cfg.spec.basis), tilt_(make_tilt(cfg.pot, basis_, cfg.effective_p(), cfg.mode)) {
    has_drift_ = !cfg.pot.is_none() || tilt_.p != 0.0 || cfg.mode == Mode::P;
    if (cfg.mode == Mode::M) ou_coefficients(cfg.spec, cfg.dt, decay_, scale_);
    z_.resize(cfg.spec.n_modes());
  }

  const Tilt& tilt() const { return tilt_; }

  void step(CoeffVector& c, RandomStream& rng) {
    if (cfg_.integrator == Integrator::EulerMaruyama) {
      euler_step(c, rng);
      return;
    }
    if (has_drift_) c = drift_step(c, cfg_.dt, tilt_, basis_);
    if (cfg_.mode == Mode::P) {
      const double rho = norm2(c);
      if (!(rho > kDegenerateNorm2)) throw DegenerateInput("P-mode flow reached |c| ~ 0");
      ou_coefficients(cfg_.spec, rho * cfg_.dt, decay_, scale_);
    }
    for (double& z : z_) z = rng.normal();
    kernels::active().ou_update(c.data(), decay_.data(), scale_.data(), z_.data(), c.size());
  }

 private:
  void euler_step(CoeffVector& c, RandomStream& rng) {
    const double rho = norm2(c);
    CoeffVector gv(c.size(), 0.0);
    if (!cfg_.pot.is_none()) gv = potential_gradient(tilt_.pot, basis_, c, cfg_.mode);
    const double dt = cfg_.dt;
    const auto& s = cfg_.spec.s;
    if (cfg_.mode == Mode::M) {
      const double pr = tilt_.p == 0.0 ? 0.0 : tilt_.p / rho;
      const double sig = std::sqrt(0.5 * dt);
      for (std::size_t n = 0; n < c.size(); ++n) {
        const double b = -0.25 * (c[n] / (s[n] * s[n]) + gv[n] - pr * c[n]);
        c[n] += b * dt + sig * rng.normal();
      }
    } else {
      const double sig = std::sqrt(0.5 * rho * dt);
      for (std::size_t n = 0; n < c.size(); ++n) {
        const double b = 0.25 * ((tilt_.p + 2.0) * c[n] - rho * (c[n] / (s[n] * s[n]) + gv[n]));
        c[n] += b * dt + sig * rng.normal();
      }
    }
  }

  const FlowConfig& cfg_;
  const SpectralBasis& basis_;
  Tilt tilt_;
  bool has_drift_ = false;
  Vec decay_, scale_, z_;
};

ExecPolicy chain_policy(const ExecPolicy& exec) { return ExecPolicy{exec.workers, 1}; }

}  // namespace

void ou_exact_step(CoeffVector& c, double dt, const GaussianSpec& spec, RandomStream& rng) {
  if (!(dt > 0.0)) throw ConfigError("ou step needs dt > 0");
  if (c.size() != spec.n_modes()) throw DimensionMismatch("coefficient vector has wrong length");
  Vec decay, scale, z(c.size());
  ou_coefficients(spec, dt, decay, scale);
  for (double& v : z) v = rng.normal();
  kernels::active().ou_update(c.data(), decay.data(), scale.data(), z.data(), c.size());
}

CoeffVector ou_exact_step(const CoeffVector& c, double dt, const GaussianSpec& spec, RandomStream& rng) {
  CoeffVector out = c;
  ou_exact_step(out, dt, spec, rng);
  return out;
}

CoeffVector drift_step(const CoeffVector& c, double dt, const Tilt& tilt, const SpectralBasis& basis) {
  if (!(dt > 0.0)) throw ConfigError("drift step needs dt > 0");
  CoeffVector out = c;
  CoeffVector gv;
  if (!tilt.pot.pot.is_none()) gv = potential_gradient(tilt.pot, basis, c, tilt.mode);
  const double rho = norm2(c);
  if (tilt.mode == Mode::M) {
    const double pr = tilt.p == 0.0 ? 0.0 : tilt.p / rho;
    for (std::size_t n = 0; n < c.size(); ++n) {
      const double g = gv.empty() ? 0.0 : gv[n];
      out[n] -= 0.25 * dt * (g - pr * c[n]);
    }
  } else {
    for (std::size_t n = 0; n < c.size(); ++n) {
      const double g = gv.empty() ? 0.0 : gv[n];
      out[n] += 0.25 * dt * ((tilt.p + 2.0) * c[n] - rho * g);
    }
  }
  return out;
}

NamedObservable cylinder_observable(std::string name, const CylinderFunction& u, const SpectralBasis& basis) {
  auto bound = std::make_shared<const BoundCylinder>(bind(u, basis.grid()));
  return {std::move(name), [bound](const CoeffVector&, const GridDensity& mu) { return eval_cylinder(*bound, mu); }};
}

Trajectory simulate(const FlowConfig& cfg, const CoeffVector& c0, const std::vector<NamedObservable>& obs,
                    std::size_t chain) {
  cfg.validate();
  if (c0.size() != cfg.spec.n_modes()) throw DimensionMismatch("initial state has wrong length");
  const SpectralBasis& basis = *cfg.spec.basis;
  Stepper stepper(cfg);
  RandomStream rng(cfg.seed, streams::kFlowNoise, chain);
  Trajectory tr;
  for (const auto& o : obs) tr.names.push_back(o.name);
  CoeffVector c = c0;
  auto record = [&](std::size_t step) {
    tr.times.push_back(static_cast<double>(step) * cfg.dt);
    tr.snapshots.push_back(c);
    Vec row;
    if (!obs.empty()) {
      const GridDensity mu = push_forward(c, basis, cfg.mode);
      for (const auto& o : obs) row.push_back(o.fn(c, mu));
    }
    tr.values.push_back(std::move(row));
  };
  record(0);
  for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
    stepper.step(c, rng);
    if (step % cfg.record_every == 0) record(step);
  }
  return tr;
}

Trajectory simulate(const FlowConfig& cfg, const std::vector<NamedObservable>& obs, std::size_t chain) {
  return simulate(cfg, sample_g(cfg.spec, cfg.seed, chain, streams::kFlowInit), obs, chain);
}

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "t";
  for (const auto& n : tr.names) os << ',' << n;
  os << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < tr.times.size(); ++r) {
    os << tr.times[r];
    for (double v : tr.values[r]) os << ',' << v;
    os << '\n';
  }
}

ErgodicReport ergodic_averages(const FlowConfig& cfg, const std::vector<NamedObservable>& obs,
                               std::size_t burn_in_steps, std::size_t sample_every) {
  cfg.validate();
  if (sample_every == 0) throw ConfigError("sample_every must be >= 1");
  if (burn_in_steps >= cfg.n_steps) throw ConfigError("burn-in must be shorter than the run");
  const SpectralBasis& basis = *cfg.spec.basis;
  const std::size_t K = obs.size();
  std::vector<Vec> per_chain(K, Vec(cfg.n_chains));
  for_each_chunk(cfg.n_chains, chain_policy(cfg.exec), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t ch = begin; ch < end; ++ch) {
      Stepper stepper(cfg);
      RandomStream rng(cfg.seed, streams::kFlowNoise, ch);
      CoeffVector c = sample_g(cfg.spec, cfg.seed, ch, streams::kFlowInit);
      Vec acc(K, 0.0);
      std::size_t count = 0;
      for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
        stepper.step(c, rng);
        if (step <= burn_in_steps || (step - burn_in_steps) % sample_every != 0) continue;
        const GridDensity mu = push_forward(c, basis, cfg.mode);
        for (std::size_t k = 0; k < K; ++k) acc[k] += obs[k].fn(c, mu);
        ++count;
      }
      for (std::size_t k = 0; k < K; ++k) per_chain[k][ch] = acc[k] / static_cast<double>(count);
    }
  });
  ErgodicReport r;
  for (std::size_t k = 0; k < K; ++k) {
    r.names.push_back(obs[k].name);
    r.time_average.push_back(mean_estimate(per_chain[k]));
  }
  return r;
}

ReversibilityReport reversibility_check(const FlowConfig& cfg, const NamedObservable& u, const NamedObservable& v,
                                        std::size_t burn_in_steps, std::size_t lag_steps) {
  cfg.validate();
  if (lag_steps == 0 || burn_in_steps + lag_steps >= cfg.n_steps)
    throw ConfigError("reversibility check needs 0 < lag and burn-in + lag < n_steps");
  const SpectralBasis& basis = *cfg.spec.basis;
  Vec uv(cfg.n_chains), vu(cfg.n_chains), diff(cfg.n_chains);
  for_each_chunk(cfg.n_chains, chain_policy(cfg.exec), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t ch = begin; ch < end; ++ch) {
      Stepper stepper(cfg);
      RandomStream rng(cfg.seed, streams::kFlowNoise, ch);
      CoeffVector c = sample_g(cfg.spec, cfg.seed, ch, streams::kFlowInit);
      Vec us, vs;
      for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
        stepper.step(c, rng);
        if (step <= burn_in_steps) continue;
        const GridDensity mu = push_forward(c, basis, cfg.mode);
        us.push_back(u.fn(c, mu));
        vs.push_back(v.fn(c, mu));
      }
      const std::size_t m = us.size() - lag_steps;
      double su = 0.0, sv = 0.0, a = 0.0, b = 0.0;
      for (std::size_t t = 0; t < us.size(); ++t) {
        su += us[t];
        sv += vs[t];
      }
      su /= static_cast<double>(us.size());
      sv /= static_cast<double>(vs.size());
      for (std::size_t t = 0; t < m; ++t) {
        a += us[t] * vs[t + lag_steps];
        b += vs[t] * us[t + lag_steps];
      }
      uv[ch] = a / static_cast<double>(m) - su * sv;
      vu[ch] = b / static_cast<double>(m) - su * sv;
      diff[ch] = uv[ch] - vu[ch];
    }
  });
  ReversibilityReport r;
  r.uv = mean_estimate(uv);
  r.vu = mean_estimate(vu);
  const MCEstimate d = mean_estimate(diff);
  r.ok = std::fabs(d.value) <= 3.0 * d.std_error;
  return r;
}

MCEstimate martingale_residual(const FlowConfig& cfg, const CylinderFunction& u, double horizon) {
  cfg.validate();
  if (!(horizon > 0.0)) throw ConfigError("martingale horizon must be > 0");
  const std::size_t steps = static_cast<std::size_t>(std::llround(horizon / cfg.dt));
  if (steps == 0) throw ConfigError("martingale horizon shorter than one step");
  const SpectralBasis& basis = *cfg.spec.basis;
  const LiftedCylinder lu = lift(u, basis);
  Vec logw(cfg.n_chains), vals(cfg.n_chains);
  for_each_chunk(cfg.n_chains, cfg.exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t ch = begin; ch < end; ++ch) {
      Stepper stepper(cfg);
      const Tilt& tilt = stepper.tilt();
      RandomStream rng(cfg.seed, streams::kFlowNoise, ch);
      CoeffVector c = sample_g(cfg.spec, cfg.seed, ch, streams::kFlowInit);
      logw[ch] = gibbs_weight(c, basis, tilt).log_weight();
      if (!std::isfinite(logw[ch])) {
        vals[ch] = 0.0;
        continue;
      }
      const double u0 = evaluate(lu, basis, c, cfg.mode, 0).value;
      double integral = 0.0;
      for (std::size_t step = 0; step < steps; ++step) {
        integral += apply_generator(lu, cfg.spec, tilt, c) * cfg.dt;
        stepper.step(c, rng);
      }
      vals[ch] = evaluate(lu, basis, c, cfg.mode, 0).value - u0 - integral;
    }
  });
  return weighted_estimate(logw, vals);
}

OUMomentAudit ou_moment_audit(const GaussianSpec& spec, double T, double dt, std::size_t n_chains,
                              std::uint64_t seed, const ExecPolicy& exec) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw ConfigError("moment audit needs dt > 0 and T >= 0");
  if (n_chains < 2) throw ConfigError("moment audit needs at least 2 chains");
  const std::size_t steps = static_cast<std::size_t>(std::llround(T / dt));
  const std::size_t N = spec.n_modes();
  Vec decay, scale;
  ou_coefficients(spec, dt, decay, scale);
  std::vector<Vec> first(N, Vec(n_chains)), second(N, Vec(n_chains));
  for_each_chunk(n_chains, exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    Vec z(N);
    for (std::size_t ch = begin; ch < end; ++ch) {
      RandomStream rng(seed, streams::kFlowNoise, ch);
      CoeffVector c = sample_g(spec, seed, ch, streams::kFlowInit);
      for (std::size_t s = 0; s < steps; ++s) {
        for (double& v : z) v = rng.normal();
        kernels::active().ou_update(c.data(), decay.data(), scale.data(), z.data(), N);
      }
      for (std::size_t n = 0; n < N; ++n) {
        first[n][ch] = c[n];
        second[n][ch] = c[n] * c[n];
      }
    }
  });
  OUMomentAudit a;
  a.ok = true;
  for (std::size_t n = 0; n < N; ++n) {
    a.mean.push_back(mean_estimate(first[n]));
    a.second_moment.push_back(mean_estimate(second[n]));
    a.target.push_back(spec.s[n] * spec.s[n]);
    const double z1 = std::fabs(a.mean[n].value) / a.mean[n].std_error;
    const double z2 = std::fabs(a.second_moment[n].value - a.target[n]) / a.second_moment[n].std_error;
    if (z1 > 3.0 || z2 > 3.0) a.ok = false;
    if (z2 > a.worst_z) {
      a.worst_z = z2;
      a.worst_mode = n;
    }
  }
  return a;
}

DensityBound density_bound_check(const Vec& rates, double t) {
  if (!(t > 0.0)) throw ConfigError("density bound needs t > 0");
  DensityBound b;
  for (double q : rates) {
    if (!(q > 0.0)) throw ConfigError("density bound needs positive rates");
    const double a = 2.0 * q * t;
    const double x = std::exp(-a);
    b.log_lhs -= std::log1p(-x);
    b.log_rhs += std::log1p(2.0 * x / std::min(a, 1.0));
  }
  b.ok = b.log_lhs <= b.log_rhs;
  return b;
}

Vec relaxation_rates(const GaussianSpec& spec) {
  Vec r(spec.n_modes());
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = spec.rate(n);
  return r;
}

namespace {

// Probabilists' rule: E f(sigma Z) ~ sum_i w_i f(sigma x_i).
struct NormalRule {
  Vec x, w;
};

NormalRule normal_rule(int order) {
  if (order < 8 || order > 400) throw ConfigError("quadrature order must lie in [8, 400]");
  const GaussHermite1D gh = gauss_hermite_1d(order);
  NormalRule r;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < order; ++i) {
    r.x.push_back(std::sqrt(2.0) * gh.nodes[i]);
    r.w.push_back(std::exp(gh.log_weights[i]) * inv_sqrt_pi);
  }
  return r;
}

double xlogx(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

double log_sum_exp(const Vec& a) {
  double mx = -kInf;
  for (double x : a) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : a) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

LsiReport lsi_check(const ScalarFunction& u, const Vec& rates, int order) {
  if (u.dim < 1 || u.dim > 2) throw ConfigError("lsi_check supports 1 or 2 modes");
  if (rates.size() != static_cast<std::size_t>(u.dim)) throw DimensionMismatch("one rate per coordinate");
  for (double q : rates)
    if (!(q > 0.0)) throw ConfigError("rates must be positive");
  const NormalRule rule = normal_rule(order);
  double sd[2] = {1.0, 1.0};
  for (int a = 0; a < u.dim; ++a) sd[a] = std::sqrt(0.25 / rates[a]);
  double m = 0.0, e = 0.0, grad2 = 0.0;
  const std::size_t Q = rule.x.size();
  const std::size_t Q2 = u.dim == 2 ? Q : 1;
  for (std::size_t i = 0; i < Q; ++i) {
    for (std::size_t j = 0; j < Q2; ++j) {
      const double x[2] = {sd[0] * rule.x[i], u.dim == 2 ? sd[1] * rule.x[j] : 0.0};
      const double w = rule.w[i] * (u.dim == 2 ? rule.w[j] : 1.0);
      const double val = u.value(x);
      double g[2] = {0.0, 0.0};
      u.grad(x, g);
      m += w * val * val;
      e += w * xlogx(val * val);
      grad2 += w * (g[0] * g[0] + g[1] * g[1]);
    }
  }
  if (!std::isfinite(m) || !std::isfinite(e) || !std::isfinite(grad2))
    throw NumericalError("lsi quadrature produced a non-finite value");
  if (!(m > 0.0)) throw DegenerateInput("lsi_check needs u not identically zero");
  const double q1 = *std::min_element(rates.begin(), rates.end());
  LsiReport r;
  r.entropy_side = (e - xlogx(m)) / m;
  const double energy = 0.25 * grad2 / m;
  r.energy_side = 2.0 / q1 * energy;
  r.energy_side_inverse_cov = 2.0 / (4.0 * q1) * energy;
  r.ok = r.entropy_side <= r.energy_side + 1e-9;
  return r;
}

HyperReport hypercontractivity_check(const ScalarFunction& u, double t, double r, double q1, int order) {
  if (u.dim != 1) throw ConfigError("hypercontractivity check is single-mode");
  if (!(r > 1.0) || !(t >= 0.0) || !(q1 > 0.0)) throw ConfigError("need r > 1, t >= 0, q1 > 0");
  const NormalRule rule = normal_rule(order);
  const double sd = std::sqrt(0.25 / q1);
  const double decay = std::exp(-q1 * t);
  const double noise = sd * std::sqrt(-std::expm1(-2.0 * q1 * t));
  HyperReport h;
  h.r_t = 1.0 + (r - 1.0) * std::exp(2.0 * q1 * t);
  // Norms in log space; r_t grows like e^{2 q1 t}.
  Vec log_lhs, log_rhs;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double x = sd * rule.x[i];
    double pt = 0.0;
    for (std::size_t j = 0; j < rule.x.size(); ++j) {
      const double y = decay * x + noise * rule.x[j];
      pt += rule.w[j] * u.value(&y);
    }
    const double lw = std::log(rule.w[i]);
    log_lhs.push_back(lw + h.r_t * std::log(std::fabs(pt)));
    log_rhs.push_back(lw + r * std::log(std::fabs(u.value(&x))));
  }
  h.lhs_norm = std::exp(log_sum_exp(log_lhs) / h.r_t);
  h.rhs_norm = std::exp(log_sum_exp(log_rhs) / r);
  if (!std::isfinite(h.lhs_norm) || !std::isfinite(h.rhs_norm))
    throw NumericalError("hypercontractivity quadrature produced a non-finite value");
  h.ok = h.lhs_norm <= h.rhs_norm + 1e-9;
  return h;
}

}  // namespace mflow
