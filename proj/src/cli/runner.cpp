#include "mflow/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "mflow/cli/batteries.hpp"
#include "mflow/errors.hpp"
#include "mflow/qr_toolkit.hpp"

namespace mflow::cli {

namespace {

std::shared_ptr<const GaussianSpec> make_spec(const ExperimentConfig& cfg) {
  return std::make_shared<const GaussianSpec>(GaussianSpec::make(cfg.spectral));
}

SampleOptions sample_options(const ExperimentConfig& cfg, std::uint64_t stream = streams::kGaussian) {
  SampleOptions o;
  o.seed = cfg.seed;
  o.stream = stream;
  o.exec = cfg.exec;
  return o;
}

std::size_t get_size(const json& sec, const char* key, std::size_t def) {
  if (!sec.contains(key)) return def;
  const auto v = sec.at(key).get<long long>();
  if (v < 0) throw ConfigError(std::string("'") + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

const char* mode_tag(Mode m) { return m == Mode::M ? "M" : "P"; }

CoeffVector unit(CoeffVector c) {
  double n2 = 0.0;
  for (double x : c) n2 += x * x;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : c) x *= inv;
  return c;
}

Record check_chain_rule(const ExperimentConfig& cfg) {
  Record r{"check chain-rule", {}, json::object()};
  const json& sec = cfg.section("check");
  const double h = sec.value("chain_step", 1e-4);
  const std::size_t points = get_size(sec, "chain_points", 20);
  const auto spec = make_spec(cfg);
  const SpectralBasis& basis = *spec->basis;
  const auto battery = cylinder_battery(cfg.spectral.d);
  for (Mode mode : {Mode::M, Mode::P}) {
    for (std::size_t f = 0; f < battery.size(); ++f) {
      const LiftedCylinder lu = lift(battery[f], basis);
      double r1 = 0.0, r2 = 0.0;
      for (std::size_t i = 0; i < points; ++i) {
        CoeffVector c = sample_g(*spec, cfg.seed, i, streams::kAudit);
        // U o Psi_P is 0-homogeneous; evaluate on the unit sphere.
        if (mode == Mode::P) c = unit(c);
        r1 = std::max(r1, chain_rule_residual(lu, basis, c, h, mode));
        r2 = std::max(r2, chain_rule_residual(lu, basis, c, 0.5 * h, mode));
      }
      const std::string tag = std::string(mode_tag(mode)) + "/u" + std::to_string(f);
      r.expect_le("residual " + tag, r1, 1e-6, "oracle");
      r.expect_le("|richardson-4| " + tag, std::fabs(r1 / r2 - 4.0), 0.8, "oracle");
    }
  }
  return r;
}

Record check_quarter(const ExperimentConfig& cfg) {
  Record r{"check quarter", {}, json::object()};
  const std::size_t n = get_size(cfg.section("check"), "quarter_samples", 1000);
  const auto spec = make_spec(cfg);
  const SpectralBasis& basis = *spec->basis;
  const auto battery = cylinder_battery(cfg.spectral.d);
  std::vector<LiftedCylinder> lifted;
  for (const auto& u : battery) lifted.push_back(lift(u, basis));
  for (Mode mode : {Mode::M, Mode::P}) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const CoeffVector c = sample_g(*spec, cfg.seed, i, streams::kAudit);
      const std::size_t a = i % lifted.size(), b = (i + 1) % lifted.size();
      worst = std::max(worst, quarter_identity_residual(lifted[a], lifted[b], basis, c, mode));
    }
    r.expect_le(std::string("max residual ") + mode_tag(mode), worst, 1e-10, "formula");
  }
  return r;
}

Record check_ibp(const ExperimentConfig& cfg) {
  Record r{"check ibp", {}, json::object()};
  const std::size_t n = get_size(cfg.section("check"), "ibp_samples", 100000);
  const auto spec = make_spec(cfg);
  const auto pairs = ibp_pairs(cfg.spectral.d);
  const PotentialSpec tilted = cfg.pot.is_none() ? potential_entropy() : cfg.pot;
  const std::vector<std::pair<std::string, PotentialSpec>> pots = {{"none", potential_none()}, {tilted.name, tilted}};
  for (const auto& [pname, pot] : pots) {
    const Tilt tilt = make_tilt(pot, *spec->basis, 0.0, Mode::M);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const MCEstimate e = ibp_residual(*spec, tilt, pairs[k].first, pairs[k].second, n, sample_options(cfg));
      const std::string tag = pname + "/pair" + std::to_string(k);
      r.expect_le("|residual|/stderr " + tag, std::fabs(e.value) / e.std_error, 3.0, "mc");
      r.data[tag] = {{"value", e.value}, {"std_error", e.std_error}, {"ess", e.ess}};
    }
  }
  return r;
}

Record check_jump_bound(const ExperimentConfig& cfg) {
  Record r{"check jump-bound", {}, json::object()};
  const std::size_t n = get_size(cfg.section("check"), "jump_pairs", 200);
  const auto spec = make_spec(cfg);
  const SpectralBasis& basis = *spec->basis;
  const auto battery = cylinder_battery(cfg.spectral.d);
  for (Mode mode : {Mode::M, Mode::P}) {
    std::vector<std::pair<GridDensity, GridDensity>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      const CoeffVector a = sample_g(*spec, cfg.seed, 2 * i, streams::kGaussianPair);
      const CoeffVector b = sample_g(*spec, cfg.seed, 2 * i + 1, streams::kGaussianPair);
      pairs.emplace_back(push_forward(a, basis, mode), push_forward(b, basis, mode));
    }
    std::size_t violations = 0;
    double slack = kInf;
    for (const auto& u : battery) {
      const JumpBoundReport rep = jump_bound_check(u, pairs, mode, 1e-12);
      violations += rep.violations;
      slack = std::min(slack, rep.worst_slack);
    }
    r.expect_le(std::string("violations ") + mode_tag(mode), static_cast<double>(violations), 0.0, "formula");
    r.note(std::string("worst slack ") + mode_tag(mode), slack, "formula");
  }
  return r;
}

Record check_lip(const ExperimentConfig& cfg) {
  Record r{"check lip", {}, json::object()};
  const std::size_t n = get_size(cfg.section("check"), "lip_measures", 1000);
  const auto spec = make_spec(cfg);
  const SpectralBasis& basis = *spec->basis;
  const auto battery = cylinder_battery(cfg.spectral.d);
  struct Comp {
    OuterMap g;
    std::vector<CylinderFunction> parts;
  };
  const std::vector<Comp> comps = {{outer_tanh_sum({0.6, -0.8}), {battery[0], battery[3]}},
                                   {outer_sin_cos(), {battery[1], battery[2]}},
                                   {outer_gauss_bump(), {battery[4]}}};
  for (Mode mode : {Mode::M, Mode::P}) {
    std::vector<BoundCylinder> bound;
    std::vector<QrBound> qb;
    for (const auto& u : battery) {
      bound.push_back(mflow::bind(u, basis.grid()));
      qb.push_back(qr_bound(u, mode));
    }
    std::size_t lip_viol = 0, qr_viol = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const CoeffVector c = sample_g(*spec, cfg.seed, i, streams::kAudit);
      const GridDensity mu = push_forward(c, basis, mode);
      for (const auto& comp : comps)
        if (!lip_composition_check(comp.g, comp.parts, mu, mode, 1e-12).ok) ++lip_viol;
      for (std::size_t f = 0; f < bound.size(); ++f)
        if (sampled_derivative_sup(bound[f], mu, mode) > qb[f].derivative) ++qr_viol;
    }
    r.expect_le(std::string("composition violations ") + mode_tag(mode), static_cast<double>(lip_viol), 0.0,
                "formula");
    r.expect_le(std::string("qr_bound violations ") + mode_tag(mode), static_cast<double>(qr_viol), 0.0, "formula");
  }
  return r;
}

Record check_k_functional(const ExperimentConfig& cfg) {
  Record r{"check k-functional", {}, json::object()};
  const std::size_t n = get_size(cfg.section("check"), "kfun_instances", 200);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(cfg.seed, streams::kAudit, i);
    const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 12.0);
    const double total = 2.0 * rng.uniform();
    Vec g(m), w(m);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      g[j] = 3.0 * rng.normal();
      w[j] = rng.uniform();
      s += w[j];
    }
    for (double& x : w) x *= total / s;
    worst = std::max(worst, std::fabs(k_functional(g, w) - k_functional_threshold(g, w)));
  }
  r.expect_le("max |rearrangement - threshold|", worst, 1e-9, "oracle");
  return r;
}

Record check_separation(const ExperimentConfig& cfg) {
  Record r{"check separation", {}, json::object()};
  const json& sec = cfg.section("check");
  const std::size_t n = get_size(sec, "separation_pairs", 50);
  const std::size_t budget = get_size(sec, "separation_budget", 64);
  const auto spec = make_spec(cfg);
  const SpectralBasis& basis = *spec->basis;
  std::vector<std::pair<GridDensity, GridDensity>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const CoeffVector a = sample_g(*spec, cfg.seed, 2 * i, streams::kGaussianPair);
    const CoeffVector b = sample_g(*spec, cfg.seed, 2 * i + 1, streams::kGaussianPair);
    pairs.emplace_back(push_forward_P(a, basis), push_forward_P(b, basis));
  }
  const SeparatingFamily fam = separating_family(halton_anchors(cfg.spectral.d, 8), cfg.spectral.d, budget);
  const SeparationReport rep = separation_test(pairs, fam);
  std::vector<std::vector<double>> rows;
  for (const auto& rec : rep.records)
    rows.push_back({static_cast<double>(rec.pair), static_cast<double>(rec.member), rec.gap});
  write_csv(cfg, "separation", {"pair", "member", "gap"}, rows);
  r.expect_le("unseparated pairs", static_cast<double>(rep.unseparated), 0.0, "formula");
  return r;
}

Record check_density_bound(const ExperimentConfig& cfg) {
  Record r{"check density-bound", {}, json::object()};
  const auto spec = make_spec(cfg);
  const Vec rates = relaxation_rates(*spec);
  std::size_t viol = 0;
  std::vector<std::vector<double>> rows;
  for (int k = 0; k <= 12; ++k) {
    const double t = std::pow(10.0, -2.0 + 3.0 * k / 12.0);
    const DensityBound b = density_bound_check(rates, t);
    if (!b.ok) ++viol;
    rows.push_back({t, b.log_lhs, b.log_rhs});
  }
  write_csv(cfg, "density_bound", {"t", "log_lhs", "log_rhs"}, rows);
  r.expect_le("violations", static_cast<double>(viol), 0.0, "formula");
  return r;
}

Record check_lsi(const ExperimentConfig& cfg) {
  Record r{"check lsi", {}, json::object()};
  const auto spec = make_spec(cfg);
  const Vec rates = relaxation_rates(*spec);
  if (rates.size() < 2) throw ConfigError("lsi check needs at least 2 retained modes");
  const int order = cfg.section("check").value("quad_order", 120);
  std::size_t viol = 0, viol_alt = 0;
  double slack = kInf;
  for (const auto& u : lsi_battery()) {
    const Vec q(rates.begin(), rates.begin() + u.dim);
    const LsiReport rep = lsi_check(u, q, order);
    if (!rep.ok) ++viol;
    if (rep.entropy_side > rep.energy_side_inverse_cov + 1e-9) ++viol_alt;
    slack = std::min(slack, rep.energy_side - rep.entropy_side);
  }
  r.expect_le("violations", static_cast<double>(viol), 0.0, "oracle");
  r.note("min slack", slack, "oracle");
  r.note("violations with q1 = 1/s^2", static_cast<double>(viol_alt), "oracle");
  return r;
}

Record check_hyper(const ExperimentConfig& cfg) {
  Record r{"check hyper", {}, json::object()};
  const auto spec = make_spec(cfg);
  const double q1 = relaxation_rates(*spec).front();
  const int order = cfg.section("check").value("quad_order", 120);
  std::size_t viol = 0;
  double slack = kInf;
  for (const auto& hc : hyper_battery()) {
    const HyperReport rep = hypercontractivity_check(hc.u, hc.t, hc.r, q1, order);
    if (!rep.ok) ++viol;
    slack = std::min(slack, rep.rhs_norm - rep.lhs_norm);
  }
  r.expect_le("violations", static_cast<double>(viol), 0.0, "oracle");
  r.note("min slack", slack, "oracle");
  return r;
}

Record check_cdx(const ExperimentConfig& cfg) {
  Record r{"check cdx", {}, json::object()};
  if (cfg.pot.is_none()) throw ConfigError("check cdx needs a configured potential");
  const auto& sc = cfg.spectral;
  const MarginResult m0 = integrability_margin(sc.alpha, cfg.pot.alpha1, sc.d_prime, 0.0, sc.d);
  r.expect_le("-margin", -m0.margin, 0.0, "formula");
  if (!m0.ok) return r;
  const double delta = 0.5 * sc.alpha * m0.margin;
  const std::size_t n_max = get_size(cfg.section("check"), "cdx_max_samples", 102400);
  const auto spec = make_spec(cfg);
  const BoundPotential pot = mflow::bind(cfg.pot, spec->basis->grid());
  const ExponentialMomentRun run = exponential_moment_run(*spec, pot, delta, n_max, sample_options(cfg));
  json rows = json::array();
  for (std::size_t i = 0; i < run.n.size(); ++i)
    rows.push_back({{"n", run.n[i]}, {"value", run.estimate[i].value}, {"std_error", run.estimate[i].std_error}});
  r.data["delta"] = delta;
  r.data["run"] = rows;
  r.note("delta", delta, "formula");
  r.expect_le("not stabilized", run.stabilized ? 0.0 : 1.0, 0.0, "mc");
  return r;
}

FormSpec parse_form(const json& sec, const ExperimentConfig& cfg, const SpectralBasis& basis) {
  FormSpec f;
  f.kind = parse_form_kind(sec.value("kind", "diffusion_M"));
  f.tilt = cfg.pot;
  f.p = sec.value("p", 0.0);
  f.mode = parse_mode(sec.value("mode", "M"));
  if (sec.contains("jump")) {
    const json& j = sec.at("jump");
    const std::string kind = j.value("kind", "constant");
    if (kind == "constant") f.jump = jump_constant(j.value("value", 1.0));
    else if (kind == "mass_gap") f.jump = jump_mass_gap(j.value("sigma", 1.0));
    else throw ConfigError("unknown jump kernel '" + kind + "'");
  } else if (f.kind == FormKind::Jump) {
    f.jump = jump_constant(1.0);
  }
  if (f.kind == FormKind::Killing) f.killing = killing_saturating_mass(sec.value("killing_rate", 1.0));
  f.k_tail = sec.value("k_tail", 1.0);
  if (sec.contains("k_eigenvalues")) f.K_eigenvalues = sec.at("k_eigenvalues").get<Vec>();
  else if (f.kind == FormKind::DiffusionA) f.K_eigenvalues.assign(basis.n_modes(), 1.0);
  f.validate(basis);
  return f;
}

}  // namespace

double k_functional_threshold(const Vec& g, const Vec& w) {
  double best = kInf;
  Vec taus{0.0};
  for (double x : g) taus.push_back(std::fabs(x));
  for (double tau : taus) {
    double s = tau;
    for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * std::max(std::fabs(g[i]) - tau, 0.0);
    best = std::min(best, s);
  }
  return best;
}

Record run_spectrum(const ExperimentConfig& cfg) {
  Record r{"spectrum", {}, json::object()};
  const SpectralBasis basis(cfg.spectral);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header{"mode"};
  for (int a = 0; a < cfg.spectral.d; ++a) header.push_back("n" + std::to_string(a + 1));
  header.push_back("lambda");
  double worst = 0.0;
  json table = json::array();
  for (std::size_t m = 0; m < basis.n_modes(); ++m) {
    const MultiIndex& n = basis.modes()[m];
    std::vector<double> row{static_cast<double>(m)};
    int total = 0;
    for (int x : n) {
      row.push_back(x);
      total += x;
    }
    const double lam = basis.eigenvalues()[m];
    row.push_back(lam);
    rows.push_back(row);
    table.push_back(lam);
    worst = std::max(worst, std::fabs(lam - (2.0 * total + cfg.spectral.d + cfg.spectral.alpha)));
  }
  write_csv(cfg, "spectrum", header, rows);
  r.data["eigenvalues"] = table;
  r.expect_le("max |lambda - (2|n| + d + alpha)|", worst, 0.0, "formula");
  return r;
}

Record run_sample(const ExperimentConfig& cfg) {
  Record r{"sample", {}, json::object()};
  const json& sec = cfg.section("gaussian");
  const std::size_t n = get_size(sec, "n_samples", 10000);
  if (n < 100) throw ConfigError("gaussian.n_samples must be >= 100");
  const Mode mode = parse_mode(sec.value("mode", "M"));
  const double p = sec.value("p", 0.0);
  const auto spec = make_spec(cfg);
  const SpectralBasis& basis = *spec->basis;
  const Tilt tilt = make_tilt(cfg.pot, basis, p, mode);
  const std::size_t N = spec->n_modes();
  std::vector<Vec> sq(N, Vec(n));
  Vec trace(n), trace_k(n), logw(n);
  std::vector<std::vector<double>> rows(n);
  for_each_chunk(n, cfg.exec, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const CoeffVector c = sample_g(*spec, cfg.seed, i);
      double t = 0.0, tk = 0.0;
      for (std::size_t m = 0; m < N; ++m) {
        sq[m][i] = c[m] * c[m];
        t += sq[m][i];
        tk += std::pow(basis.eigenvalues()[m], cfg.spectral.k) * sq[m][i];
      }
      trace[i] = t;
      trace_k[i] = tk;
      logw[i] = gibbs_weight(c, basis, tilt).log_weight();
      rows[i] = {static_cast<double>(i), logw[i]};
      rows[i].insert(rows[i].end(), c.begin(), c.end());
    }
  });
  std::vector<std::string> header{"index", "log_weight"};
  for (std::size_t m = 0; m < N; ++m) header.push_back("c" + std::to_string(m));
  write_csv(cfg, "samples", header, rows);
  double worst = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    const MCEstimate e = mean_estimate(sq[m]);
    worst = std::max(worst, std::fabs(e.value - spec->s[m] * spec->s[m]) / e.std_error);
  }
  r.expect_le("max per-mode second-moment z", worst, 4.0, "mc");
  double h_trace = 0.0;
  for (double sd : spec->s) h_trace += sd * sd;
  const MCEstimate tr = mean_estimate(trace);
  r.expect_le("E|c|_H^2 z", std::fabs(tr.value - h_trace) / tr.std_error, 4.0, "mc");
  const MCEstimate trk = mean_estimate(trace_k);
  r.expect_le("E|c|_Hk^2 z", std::fabs(trk.value - truncated_trace(*spec)) / trk.std_error, 4.0, "mc");
  const MCEstimate mass = weighted_estimate(logw, trace);
  r.note("tilted E|c|^2", mass.value, "mc");
  r.note("ess", mass.ess, "mc");
  return r;
}

Record run_check(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "chain-rule") return check_chain_rule(cfg);
  if (name == "quarter") return check_quarter(cfg);
  if (name == "ibp") return check_ibp(cfg);
  if (name == "jump-bound") return check_jump_bound(cfg);
  if (name == "lip") return check_lip(cfg);
  if (name == "k-functional") return check_k_functional(cfg);
  if (name == "separation") return check_separation(cfg);
  if (name == "density-bound") return check_density_bound(cfg);
  if (name == "lsi") return check_lsi(cfg);
  if (name == "hyper") return check_hyper(cfg);
  if (name == "cdx") return check_cdx(cfg);
  throw ConfigError("unknown check '" + name + "'");
}

Record run_form(const ExperimentConfig& cfg) {
  Record r{"form", {}, json::object()};
  const json& sec = cfg.section("form");
  const auto spec = make_spec(cfg);
  const FormSpec form = parse_form(sec, cfg, *spec->basis);
  const auto battery = cylinder_battery(cfg.spectral.d);
  const CylinderFunction u = sec.contains("u") ? parse_cylinder(sec.at("u"), cfg.spectral.d) : battery[0];
  const CylinderFunction v = sec.contains("v") ? parse_cylinder(sec.at("v"), cfg.spectral.d) : battery[1];
  const std::size_t n = get_size(sec, "n_samples", 10000);
  const MCEstimate e = estimate_form(*spec, form, u, v, n, sample_options(cfg));
  r.data["kind"] = form_kind_name(form.kind);
  r.note("value", e.value, "mc");
  r.note("std_error", e.std_error, "mc");
  r.note("ess", e.ess, "mc");
  r.expect_le("non-finite", std::isfinite(e.value) ? 0.0 : 1.0, 0.0, "mc");
  return r;
}

Record run_flow(const ExperimentConfig& cfg) {
  Record r{"flow", {}, json::object()};
  const json& sec = cfg.section("flow");
  FlowConfig fc(GaussianSpec::make(cfg.spectral));
  fc.pot = cfg.pot;
  fc.mode = parse_mode(sec.value("mode", "M"));
  if (sec.contains("p")) fc.p = sec.at("p").get<double>();
  fc.dt = sec.value("dt", 1e-3);
  fc.n_steps = get_size(sec, "n_steps", 20000);
  fc.n_chains = get_size(sec, "n_chains", 16);
  fc.record_every = get_size(sec, "record_every", 100);
  fc.integrator = parse_integrator(sec.value("integrator", "exact_ou"));
  fc.seed = cfg.seed;
  fc.exec = cfg.exec;
  fc.validate();
  const SpectralBasis& basis = *fc.spec.basis;

  std::vector<CylinderFunction> us;
  if (sec.contains("observables"))
    for (const auto& j : sec.at("observables")) us.push_back(parse_cylinder(j, cfg.spectral.d));
  else
    us = {cylinder_battery(cfg.spectral.d)[0], cylinder_battery(cfg.spectral.d)[1],
          cylinder_battery(cfg.spectral.d)[2]};
  std::vector<NamedObservable> obs;
  for (std::size_t k = 0; k < us.size(); ++k) obs.push_back(cylinder_observable("u" + std::to_string(k), us[k], basis));

  const Trajectory tr = simulate(fc, obs, 0);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    std::vector<double> row{tr.times[i]};
    row.insert(row.end(), tr.values[i].begin(), tr.values[i].end());
    rows.push_back(row);
  }
  std::vector<std::string> header{"t"};
  header.insert(header.end(), tr.names.begin(), tr.names.end());
  write_csv(cfg, "trajectory", header, rows);

  const std::size_t burn = get_size(sec, "burn_in", fc.n_steps / 10);
  const std::size_t every = get_size(sec, "sample_every", 10);
  const ErgodicReport erg = ergodic_averages(fc, obs, burn, every);
  const std::size_t n_ref = get_size(cfg.section("gaussian"), "n_samples", 100000);
  const Tilt tilt = make_tilt(fc.pot, basis, fc.effective_p(), fc.mode);
  std::vector<Observable> fns;
  for (const auto& o : obs) fns.push_back(o.fn);
  const auto ref = expect_many(fc.spec, tilt, fns, n_ref, sample_options(cfg));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const MCEstimate& a = erg.time_average[k];
    const double se = std::hypot(a.std_error, ref[k].std_error);
    r.expect_le("ergodic |diff|/se " + obs[k].name, std::fabs(a.value - ref[k].value) / se, 3.0, "mc");
    r.data["ergodic"][obs[k].name] = {{"time_average", a.value}, {"time_se", a.std_error},
                                      {"gibbs", ref[k].value}, {"gibbs_se", ref[k].std_error}};
  }

  FlowConfig mc = fc;
  mc.n_chains = get_size(sec, "martingale_chains", 2000);
  const MCEstimate mr = martingale_residual(mc, us[0], sec.value("horizon", 0.1));
  r.expect_le("martingale |mean|/se", std::fabs(mr.value) / mr.std_error, 3.0, "mc");
  r.data["martingale"] = {{"value", mr.value}, {"std_error", mr.std_error}};
  return r;
}

int run_report(const std::string& out_dir, std::ostream& os) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(out_dir)) throw ConfigError("output directory '" + out_dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(out_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  int failed_records = 0;
  os << std::left << std::setw(28) << "record" << std::setw(20) << "command" << std::setw(18) << "config_hash"
     << std::setw(8) << "claims" << std::setw(8) << "failed" << "status\n";
  for (const auto& f : files) {
    std::ifstream is(f);
    json j;
    try {
      is >> j;
    } catch (const json::parse_error&) {
      continue;
    }
    if (!j.contains("claims")) continue;
    int fails = 0;
    for (const auto& c : j.at("claims"))
      if (!c.value("pass", true)) ++fails;
    if (fails) ++failed_records;
    os << std::setw(28) << f.stem().string() << std::setw(20) << j.value("command", "?") << std::setw(18)
       << j.value("config_hash", "?") << std::setw(8) << j.at("claims").size() << std::setw(8) << fails
       << (fails ? "FAIL" : "pass") << '\n';
  }
  return failed_records ? kExitFail : kExitPass;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"mflow: spectral laboratory for measure-valued diffusions"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides ov;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 0;
  std::size_t chunk = 0;
  app.add_option("--config", config_path, "experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides MFLOW_SEED and the config)");
  auto* out_opt = app.add_option("--out", out, "output directory (overrides MFLOW_OUT and the config)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  auto* chunk_opt = app.add_option("--chunk", chunk, "samples per chunk; fixes the reduction order")
                        ->check(CLI::PositiveNumber);

  std::string check_name;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue table of T_alpha");
  auto* sample = app.add_subcommand("sample", "Gaussian/Gibbs draws with a moment audit");
  auto* check = app.add_subcommand("check", "run one diagnostic");
  check->add_option("name", check_name,
                    "chain-rule | quarter | ibp | jump-bound | lip | k-functional | separation | "
                    "density-bound | lsi | hyper | cdx")
      ->required();
  auto* form = app.add_subcommand("form", "estimate a Dirichlet form");
  auto* flow = app.add_subcommand("flow", "simulate a flow with ergodic and martingale diagnostics");
  auto* report = app.add_subcommand("report", "summarize the records in the output directory");
  for (auto* sub : {spectrum, sample, check, form, flow, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }
  if (*seed_opt) ov.seed = seed;
  if (*out_opt) ov.out = out;
  if (*workers_opt) ov.workers = workers;
  if (*chunk_opt) ov.chunk = chunk;

  try {
    if (report->parsed()) {
      std::string dir = ov.out.value_or("");
      if (dir.empty()) {
        const char* e = std::getenv("MFLOW_OUT");
        dir = e && *e ? e : "out";
      }
      if (!config_path.empty()) dir = load_config(config_path, ov).out;
      return run_report(dir, std::cout);
    }
    if (config_path.empty()) throw ConfigError("--config is required");
    const ExperimentConfig cfg = load_config(config_path, ov);
    if (!cfg.pot.is_none()) {
      const MarginResult m =
          integrability_margin(cfg.spectral.alpha, cfg.pot.alpha1, cfg.spectral.d_prime, 0.0, cfg.spectral.d);
      std::cerr << "cdx margin (delta = 0): " << m.margin << (m.ok ? "" : " (not integrable)") << '\n';
    }
    Record rec;
    std::string file;
    if (spectrum->parsed()) {
      rec = run_spectrum(cfg);
      file = "spectrum";
    } else if (sample->parsed()) {
      rec = run_sample(cfg);
      file = "sample";
    } else if (check->parsed()) {
      rec = run_check(check_name, cfg);
      file = "check_" + check_name;
    } else if (form->parsed()) {
      rec = run_form(cfg);
      file = "form";
    } else {
      rec = run_flow(cfg);
      file = "flow";
    }
    if (spectrum->parsed()) {
      std::cout << "eigenvalues:";
      for (const auto& v : rec.data["eigenvalues"]) std::cout << ' ' << v.get<double>();
      std::cout << '\n';
    }
    const std::string path = write_record(rec, cfg, file);
    print_record(rec, std::cout);
    std::cout << "record: " << path << '\n';
    if (!rec.passed()) {
      std::cerr << "check failed:\n" << to_json(rec, cfg).dump(2) << '\n';
      return kExitFail;
    }
    return kExitPass;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}

}  // namespace mflow::cli
