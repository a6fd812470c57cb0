#pragma once

// Monte Carlo estimators of the bilinear forms, the pointwise identities that
// connect measure-level and lift-level derivatives, and the lift generator.

#include <string>
#include <utility>

#include "mflow/gaussian.hpp"

namespace mflow {

enum class FormKind { DiffusionM, DiffusionP, DiffusionA, Jump, Killing };

FormKind parse_form_kind(const std::string& s);
const char* form_kind_name(FormKind k);

/// Jump density j(gamma, eta) >= 0, bounded.
using JumpKernel = std::function<double(const GridDensity&, const GridDensity&)>;
JumpKernel jump_constant(double c);
/// exp(-(gamma(M) - eta(M))^2 / (2 sigma^2))
JumpKernel jump_mass_gap(double sigma);

/// Killing function V(mu) >= 0.
using KillingFn = std::function<double(const GridDensity&)>;
/// a * mu(M) / (1 + mu(M))
KillingFn killing_saturating_mass(double a);

struct FormSpec {
  FormKind kind = FormKind::DiffusionM;
  PotentialSpec tilt = potential_none();
  double p = 0.0;
  Mode mode = Mode::M;  // measure space for the jump and killing kinds
  JumpKernel jump;
  KillingFn killing;
  Vec K_eigenvalues;  // retained modes; diffusion_A only
  double k_tail = 1.0;

  /// Throws ConfigError on missing kernels or K outside [k1, k2] with k1 > 0.
  void validate(const SpectralBasis& basis) const;
  /// Declared K bounds [min, max] over retained and tail eigenvalues.
  std::pair<double, double> k_bounds() const;
};

/// Per-sample integrands and log weights of estimate_form, in sample order.
struct FormSamples {
  Vec log_weights;
  Vec values;
};

FormSamples form_samples(const GaussianSpec& spec, const FormSpec& form, const CylinderFunction& u,
                         const CylinderFunction& v, std::size_t n, const SampleOptions& opt);

/// Self-normalized estimate of the chosen form. Requires n >= 100.
MCEstimate estimate_form(const GaussianSpec& spec, const FormSpec& form, const CylinderFunction& u,
                         const CylinderFunction& v, std::size_t n, const SampleOptions& opt);

/// A(mu) g = h^{-1/2} K (g h^{1/2}) with K diagonal in the full discrete
/// Hermite basis: K_eigenvalues on retained modes, k_tail elsewhere. 0/0 -> 0.
Vec apply_A(const GridDensity& mu, const Vec& g, const SpectralBasis& basis, const Vec& K_eigenvalues,
            double k_tail);

/// <A(mu) D^E u, D^E v>_{L^2(mu)} at mu = Psi_M(c), evaluated in coefficient
/// space. Equals the M-mode carre du champ bitwise when K = id.
double a_form_value(const LiftedCylinder& u, const LiftedCylinder& v, const SpectralBasis& basis,
                    const CoeffVector& c, const Vec& K_eigenvalues, double k_tail);

/// max over retained modes e of |central FD of t -> U(c + t e) - <grad U, e>|.
double chain_rule_residual(const LiftedCylinder& u, const SpectralBasis& basis, const CoeffVector& c,
                           double step, Mode mode);

/// |mu(D u D v) - (1/4) rho^{[P]} <grad U, grad V>| with both gradients taken
/// in the full discrete basis.
double quarter_identity_residual(const LiftedCylinder& u, const LiftedCylinder& v, const SpectralBasis& basis,
                                 const CoeffVector& c, Mode mode);

/// L^beta u at Psi(c):
///   M: (1/4)[Lap U - <Sigma^{-1} c + grad V - p c/|c|^2, grad U>]
///   P: (1/4)[rho (Lap U - <Sigma^{-1} c + grad V, grad U>) + (p + 2) <c, grad U>]
/// with the Laplacian truncated to retained modes.
double apply_generator(const LiftedCylinder& u, const GaussianSpec& spec, const Tilt& tilt, const CoeffVector& c);

/// Same, reusing an order-2 evaluation and a precomputed grad V.
double apply_generator(const LiftEval& eu, const GaussianSpec& spec, const Tilt& tilt, const CoeffVector& c,
                       const CoeffVector& grad_v);

/// Estimate of int Gamma_N(u, v) dLambda^beta + int v L^beta u dLambda^beta,
/// Gamma_N the truncated lift carre du champ. Requires n >= 10^4.
MCEstimate ibp_residual(const GaussianSpec& spec, const Tilt& tilt, const CylinderFunction& u,
                        const CylinderFunction& v, std::size_t n, const SampleOptions& opt);

struct JumpBoundReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_slack = kInf;  // min over pairs of bound - |u(gamma) - u(eta)|
  double bound_constant = 0.0;  // 2 |u|_inf + sup |D^E u|_inf
};

/// |u(gamma) - u(eta)| <= [1 ^ rho_var(gamma, eta)] (2|u|_inf + sup|D^E u|_inf)
/// for every pair; P mode uses the centered derivative bound.
JumpBoundReport jump_bound_check(const CylinderFunction& u,
                                 const std::vector<std::pair<GridDensity, GridDensity>>& pairs, Mode mode,
                                 double tol);

}  // namespace mflow
