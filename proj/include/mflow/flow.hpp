#pragma once

// Galerkin lifts of the O-U and Gibbs-tilted extrinsic derivative flows, and
// the semigroup diagnostics built on them.
//
// Lift SDEs (generator of dirichlet.hpp, diffusion 1/4 Laplacian):
//   M: dc = -1/4 (Sigma^{-1} c + grad V - p c/|c|^2) dt + 2^{-1/2} dW
//   P: dc = 1/4 [(p+2) c - rho (Sigma^{-1} c + grad V)] dt + (rho/2)^{1/2} dW
// with rho = |c|^2. P-mode steps freeze rho over the step.

#include <optional>
#include <string>
#include <vector>

#include "mflow/dirichlet.hpp"

namespace mflow {

enum class Integrator { ExactOU, EulerMaruyama };

Integrator parse_integrator(const std::string& s);

struct FlowConfig {
  GaussianSpec spec;
  PotentialSpec pot = potential_none();
  Mode mode = Mode::M;
  std::optional<double> p;  // default 0 in M mode, 4 theta in P mode
  double dt = 1e-3;
  std::size_t n_steps = 0;
  std::size_t n_chains = 1;
  std::size_t record_every = 1;
  Integrator integrator = Integrator::ExactOU;
  std::uint64_t seed = 1;
  ExecPolicy exec{};

  explicit FlowConfig(GaussianSpec s) : spec(std::move(s)) {}

  double effective_p() const;
  /// dt > 0, n_steps dt <= 1e4, record_every >= 1; P mode checks the
  /// potential certificates and p >= 4 theta.
  void validate() const;
};

/// c_n <- e^{-g dt} c_n + s_n (1 - e^{-2 g dt})^{1/2} xi, g = 1/(4 s_n^2).
void ou_exact_step(CoeffVector& c, double dt, const GaussianSpec& spec, RandomStream& rng);
CoeffVector ou_exact_step(const CoeffVector& c, double dt, const GaussianSpec& spec, RandomStream& rng);

/// Deterministic part of the step excluding the O-U restoring force.
///   M: c - dt/4 (grad V - p c/|c|^2)
///   P: c + dt/4 ((p+2) c - rho grad V)
CoeffVector drift_step(const CoeffVector& c, double dt, const Tilt& tilt, const SpectralBasis& basis);

struct NamedObservable {
  std::string name;
  Observable fn;
};

/// Observable u(Psi(c)) for a cylinder function.
NamedObservable cylinder_observable(std::string name, const CylinderFunction& u, const SpectralBasis& basis);

struct Trajectory {
  std::vector<double> times;
  std::vector<CoeffVector> snapshots;
  std::vector<std::string> names;
  std::vector<Vec> values;  // values[r][k] = observable k at record r
};

/// One chain from c0. Records t = 0 and every record_every-th step.
Trajectory simulate(const FlowConfig& cfg, const CoeffVector& c0, const std::vector<NamedObservable>& obs,
                    std::size_t chain = 0);

/// One chain started from the Gaussian draw number `chain` of kFlowInit.
Trajectory simulate(const FlowConfig& cfg, const std::vector<NamedObservable>& obs, std::size_t chain = 0);

/// Thinned trajectory as CSV: t, then one column per observable.
void write_trajectory_csv(const Trajectory& tr, const std::string& path);

struct ErgodicReport {
  std::vector<std::string> names;
  std::vector<MCEstimate> time_average;  // mean over chains of per-chain averages
};

/// cfg.n_chains independent chains from sample_g; per-chain time averages of
/// each observable over steps after burn_in_steps, sampled every sample_every.
ErgodicReport ergodic_averages(const FlowConfig& cfg, const std::vector<NamedObservable>& obs,
                               std::size_t burn_in_steps, std::size_t sample_every);

struct ReversibilityReport {
  MCEstimate uv;  // E[u(c_t) v(c_{t+lag})] - E u E v, averaged over chains
  MCEstimate vu;
  bool ok = false;  // |uv - vu| <= 3 combined stderr
};

ReversibilityReport reversibility_check(const FlowConfig& cfg, const NamedObservable& u, const NamedObservable& v,
                                        std::size_t burn_in_steps, std::size_t lag_steps);

/// Importance-weighted mean over chains started from G of
///   u(c_T) - u(c_0) - sum_i L u(c_{t_i}) dt
/// with the left Riemann sum over the horizon.
MCEstimate martingale_residual(const FlowConfig& cfg, const CylinderFunction& u, double horizon);

struct OUMomentAudit {
  std::vector<MCEstimate> mean;
  std::vector<MCEstimate> second_moment;
  Vec target;  // s_n^2
  std::size_t worst_mode = 0;
  double worst_z = 0.0;  // max |second_moment - s_n^2| / stderr
  bool ok = false;       // every mode within 3 stderr for both moments
};

/// Pure O-U chains from sample_g run to time T with exact steps of size dt.
OUMomentAudit ou_moment_audit(const GaussianSpec& spec, double T, double dt, std::size_t n_chains,
                              std::uint64_t seed, const ExecPolicy& exec);

struct DensityBound {
  double log_lhs = 0.0;  // sum_n -ln(1 - e^{-2 q_n t})
  double log_rhs = 0.0;  // sum_n ln(1 + 2 e^{-2 q_n t} / ((2 q_n t) ^ 1))
  bool ok = false;
};

/// Throws ConfigError for t <= 0 or a non-positive rate.
DensityBound density_bound_check(const Vec& rates, double t);

/// Relaxation rates g_n = 1/(4 s_n^2) of the implemented dynamics.
Vec relaxation_rates(const GaussianSpec& spec);

/// Smooth function of one or two Gaussian coordinates.
struct ScalarFunction {
  std::string name;
  int dim = 1;
  std::function<double(const double*)> value;
  std::function<void(const double*, double*)> grad;
};

struct LsiReport {
  double entropy_side = 0.0;        // Ent(u^2) with Lambda(u^2) = 1
  double energy_side = 0.0;         // (2/q1) E(u,u), q1 = min relaxation rate
  double energy_side_inverse_cov = 0.0;  // same with q1 = 1/s_max^2
  bool ok = false;
};

/// Gaussian with per-mode rates `rates` (variances 1/(4 rate)), E(u,u) =
/// (1/4) E|grad u|^2. Tensor Gauss-Hermite quadrature with `order` nodes per axis.
LsiReport lsi_check(const ScalarFunction& u, const Vec& rates, int order = 120);

struct HyperReport {
  double r_t = 0.0;
  double lhs_norm = 0.0;  // |P_t u|_{r_t}
  double rhs_norm = 0.0;  // |u|_r
  bool ok = false;
};

/// Single mode with relaxation rate q1; P_t by the exact O-U transition.
HyperReport hypercontractivity_check(const ScalarFunction& u, double t, double r, double q1, int order = 120);

}  // namespace mflow
