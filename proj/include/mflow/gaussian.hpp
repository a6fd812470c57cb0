#pragma once

// Truncated Gaussian reference G_{k,alpha} on coefficient space, Gibbs tilts by
// importance weights, and self-normalized Monte Carlo estimates.
//
// Covariance T^{-d'} on H_{k,alpha} in the basis lambda_n^{-k/2} e_n becomes
// the diagonal s_n^2 = lambda_n^{-(d'+k)} in H-coordinates.

#include <cstdint>
#include <functional>
#include <memory>

#include "mflow/lift.hpp"
#include "mflow/parallel.hpp"
#include "mflow/rng.hpp"

namespace mflow {

struct GaussianSpec {
  std::shared_ptr<const SpectralBasis> basis;
  Vec s;  // per-mode H-coordinate standard deviation

  explicit GaussianSpec(std::shared_ptr<const SpectralBasis> b);
  static GaussianSpec make(const SpectralConfig& cfg);

  std::size_t n_modes() const { return s.size(); }
  /// O-U relaxation rate gamma_n = 1 / (4 s_n^2) = lambda_n^{d'+k} / 4.
  double rate(std::size_t n) const { return 0.25 / (s[n] * s[n]); }
};

/// sum_n lambda_n^{-d'}, the truncated E |c|^2_{H_{k,alpha}}.
double truncated_trace(const GaussianSpec& spec);

void sample_g(const GaussianSpec& spec, RandomStream& rng, double* out);
/// Draw number `index` of stream `stream` under `seed`.
CoeffVector sample_g(const GaussianSpec& spec, std::uint64_t seed, std::uint64_t index,
                     std::uint64_t stream = streams::kGaussian);

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double ess = 0.0;
};

/// Plain mean with standard error of the mean.
MCEstimate mean_estimate(const Vec& values);

/// Self-normalized importance-sampling estimate from log weights; -inf
/// weights count as zero. Delta-method standard error, ESS = (sum w)^2 / sum w^2.
/// Throws AllWeightsZero.
MCEstimate weighted_estimate(const Vec& log_weights, const Vec& values);

struct WeightedSample {
  CoeffVector c;
  double log_reference = 0.0;  // p ln |c|
  double log_tilt = 0.0;       // -beta(Psi(c)), -inf when beta = +inf
  double log_weight() const { return log_reference + log_tilt; }
};

/// Tilt description shared by the estimators: Lambda^beta with the |c|^p factor.
struct Tilt {
  BoundPotential pot;
  double p = 0.0;
  Mode mode = Mode::M;
};

Tilt make_tilt(const PotentialSpec& pot, const SpectralBasis& basis, double p, Mode mode);

WeightedSample gibbs_weight(const CoeffVector& c, const SpectralBasis& basis, const Tilt& tilt);

/// p ln |c|_H - beta(Psi(c)). Throws DegenerateInput in P mode at c ~ 0.
double gibbs_log_weight(const CoeffVector& c, const SpectralBasis& basis, const PotentialSpec& pot, double p,
                        Mode mode);

using Observable = std::function<double(const CoeffVector&, const GridDensity&)>;

struct SampleOptions {
  std::uint64_t seed = 1;
  std::uint64_t stream = streams::kGaussian;
  ExecPolicy exec{};
};

/// Self-normalized estimate of the integral of u against Lambda^beta.
/// Requires n >= 100.
MCEstimate expect(const GaussianSpec& spec, const Tilt& tilt, const Observable& u, std::size_t n,
                  const SampleOptions& opt);

/// Runs the sampler once and evaluates several observables on the same draws.
std::vector<MCEstimate> expect_many(const GaussianSpec& spec, const Tilt& tilt,
                                    const std::vector<Observable>& us, std::size_t n, const SampleOptions& opt);

struct MarginResult {
  bool ok = false;
  double margin = 0.0;  // (d+alpha)^{d'}/2 - (delta/alpha + alpha1)
};

MarginResult integrability_margin(double alpha, double alpha1, double d_prime, double delta, int d);

/// Closed form E_G exp(delta |c|_H^2) = prod_n (1 - 2 delta s_n^2)^{-1/2};
/// +inf when some factor is non-positive.
double gaussian_exponential_moment(const GaussianSpec& spec, double delta);

struct ExponentialMomentRun {
  std::vector<std::size_t> n;      // 100, 200, 400, ...
  std::vector<MCEstimate> estimate;  // plain MC of exp(delta |c|^2 - beta)
  bool stabilized = false;           // last two within 5 combined standard errors
};

/// Running estimate of int exp(delta |c|^2 - beta(Psi_M c)) dG over doublings.
ExponentialMomentRun exponential_moment_run(const GaussianSpec& spec, const BoundPotential& pot, double delta,
                                            std::size_t n_max, const SampleOptions& opt);

}  // namespace mflow
