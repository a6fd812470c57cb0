#include "mflow/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "mflow/errors.hpp"

namespace mflow {

GaussianSpec::GaussianSpec(std::shared_ptr<const SpectralBasis> b) : basis(std::move(b)) {
  const auto& cfg = basis->config();
  s.resize(basis->n_modes());
  for (std::size_t n = 0; n < s.size(); ++n)
    s[n] = std::pow(basis->eigenvalues()[n], -0.5 * (cfg.d_prime + cfg.k));
}

GaussianSpec GaussianSpec::make(const SpectralConfig& cfg) {
  return GaussianSpec(std::make_shared<const SpectralBasis>(cfg));
}

double truncated_trace(const GaussianSpec& spec) {
  double t = 0.0;
  for (double lam : spec.basis->eigenvalues()) t += std::pow(lam, -spec.basis->config().d_prime);
  return t;
}

void sample_g(const GaussianSpec& spec, RandomStream& rng, double* out) {
  for (std::size_t n = 0; n < spec.s.size(); ++n) out[n] = spec.s[n] * rng.normal();
}

CoeffVector sample_g(const GaussianSpec& spec, std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  RandomStream rng(seed, stream, index);
  CoeffVector c(spec.n_modes());
  sample_g(spec, rng, c.data());
  return c;
}

MCEstimate mean_estimate(const Vec& values) {
  MCEstimate e;
  e.n_samples = values.size();
  e.ess = static_cast<double>(values.size());
  if (values.empty()) return e;
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  e.value = m;
  if (values.size() > 1) e.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / values.size());
  return e;
}

MCEstimate weighted_estimate(const Vec& log_weights, const Vec& values) {
  if (log_weights.size() != values.size()) throw DimensionMismatch("weights and values differ in length");
  double mx = -kInf;
  for (double lw : log_weights) mx = std::max(mx, lw);
  if (!std::isfinite(mx)) throw AllWeightsZero("every importance weight is zero");
  double sw = 0.0, sw2 = 0.0, swu = 0.0;
  Vec w(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[i] = std::exp(log_weights[i] - mx);
    if (w[i] == 0.0) continue;
    sw += w[i];
    sw2 += w[i] * w[i];
    swu += w[i] * values[i];
  }
  MCEstimate e;
  e.n_samples = values.size();
  e.value = swu / sw;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double r = w[i] / sw * (values[i] - e.value);
    var += r * r;
  }
  e.std_error = std::sqrt(var);
  e.ess = sw * sw / sw2;
  return e;
}

Tilt make_tilt(const PotentialSpec& pot, const SpectralBasis& basis, double p, Mode mode) {
  if (p < 0.0) throw ConfigError("tilt exponent p must be >= 0");
  return Tilt{bind(pot, basis.grid()), p, mode};
}

WeightedSample gibbs_weight(const CoeffVector& c, const SpectralBasis& basis, const Tilt& tilt) {
  WeightedSample s;
  s.c = c;
  double n2 = 0.0;
  for (double v : c) n2 += v * v;
  if (tilt.mode == Mode::P && !(n2 > kDegenerateNorm2))
    throw DegenerateInput("P-mode Gibbs weight is undefined at |c| ~ 0");
  s.log_reference = tilt.p == 0.0 ? 0.0 : 0.5 * tilt.p * std::log(n2);
  const double beta = potential_value(tilt.pot, basis, c, tilt.mode);
  s.log_tilt = -beta;
  return s;
}

double gibbs_log_weight(const CoeffVector& c, const SpectralBasis& basis, const PotentialSpec& pot, double p,
                        Mode mode) {
  return gibbs_weight(c, basis, make_tilt(pot, basis, p, mode)).log_weight();
}

std::vector<MCEstimate> expect_many(const GaussianSpec& spec, const Tilt& tilt,
                                    const std::vector<Observable>& us, std::size_t n, const SampleOptions& opt) {
  if (n < 100) throw ConfigError("expect needs n >= 100");
  const std::size_t K = us.size();
  Vec logw(n);
  std::vector<Vec> vals(K, Vec(n));
  const SpectralBasis& basis = *spec.basis;
  for_each_chunk(n, opt.exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const CoeffVector c = sample_g(spec, opt.seed, i, opt.stream);
      const WeightedSample ws = gibbs_weight(c, basis, tilt);
      logw[i] = ws.log_weight();
      if (!std::isfinite(logw[i])) {
        for (std::size_t k = 0; k < K; ++k) vals[k][i] = 0.0;
        continue;
      }
      const GridDensity mu = push_forward(c, basis, tilt.mode);
      for (std::size_t k = 0; k < K; ++k) vals[k][i] = us[k](c, mu);
    }
  });
  std::vector<MCEstimate> out;
  for (std::size_t k = 0; k < K; ++k) out.push_back(weighted_estimate(logw, vals[k]));
  return out;
}

MCEstimate expect(const GaussianSpec& spec, const Tilt& tilt, const Observable& u, std::size_t n,
                  const SampleOptions& opt) {
  return expect_many(spec, tilt, {u}, n, opt).front();
}

MarginResult integrability_margin(double alpha, double alpha1, double d_prime, double delta, int d) {
  if (!(alpha > 0.0) || alpha1 < 0.0 || !(d_prime > 0.0) || delta < 0.0 || d < 1)
    throw ConfigError("integrability margin needs alpha > 0, d' > 0, d >= 1 and alpha1, delta >= 0");
  MarginResult r;
  r.margin = 0.5 * std::pow(d + alpha, d_prime) - (delta / alpha + alpha1);
  r.ok = r.margin > 0.0;
  return r;
}

double gaussian_exponential_moment(const GaussianSpec& spec, double delta) {
  double log_m = 0.0;
  for (double s : spec.s) {
    const double f = 1.0 - 2.0 * delta * s * s;
    if (!(f > 0.0)) return kInf;
    log_m -= 0.5 * std::log(f);
  }
  return std::exp(log_m);
}

ExponentialMomentRun exponential_moment_run(const GaussianSpec& spec, const BoundPotential& pot, double delta,
                                            std::size_t n_max, const SampleOptions& opt) {
  Vec vals(n_max);
  const SpectralBasis& basis = *spec.basis;
  for_each_chunk(n_max, opt.exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const CoeffVector c = sample_g(spec, opt.seed, i, opt.stream);
      double n2 = 0.0;
      for (double v : c) n2 += v * v;
      const double beta = potential_value(pot, basis, c, Mode::M);
      vals[i] = std::exp(delta * n2 - beta);
    }
  });
  ExponentialMomentRun run;
  for (std::size_t n = 100; n <= n_max; n *= 2) {
    run.n.push_back(n);
    run.estimate.push_back(mean_estimate(Vec(vals.begin(), vals.begin() + static_cast<long>(n))));
  }
  const std::size_t m = run.estimate.size();
  if (m >= 2) {
    const MCEstimate& a = run.estimate[m - 2];
    const MCEstimate& b = run.estimate[m - 1];
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    run.stabilized = std::isfinite(b.value) && std::fabs(b.value - a.value) <= 5.0 * se;
  }
  return run;
}

}  // namespace mflow
