#pragma once

// Cylinder functions u(mu) = g(mu(f_1), ..., mu(f_n)), their extrinsic
// derivatives, and the potential family beta_{q,phi}(mu) = lambda(q o h + phi h).

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mflow/measure.hpp"

namespace mflow {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bounded grid-evaluable test function with a declared sup-norm bound.
struct TestFunction {
  std::string name;
  std::function<double(const Point&)> eval;
  double sup = kInf;
};

TestFunction test_constant(double value);
/// Tensor Hermite function e_n; sup bound pi^{-d/4}.
TestFunction test_hermite(const MultiIndex& n);
/// exp(-|x - center|^2 / (2 width^2)), restricted to the first d coordinates.
TestFunction test_gaussian(const Point& center, double width, int d);
/// (tanh((x_0 - a)/w) - tanh((x_0 - b)/w)) / 2 for a < b.
TestFunction test_tanh_window(double a, double b, double width);

/// Smooth outer map g: R^n -> R with gradient, Hessian and sup bounds.
struct OuterMap {
  std::string name;
  int arity = 1;
  std::function<double(const double*)> value;
  std::function<void(const double*, double*)> grad;  // arity entries
  std::function<void(const double*, double*)> hess;  // arity*arity, row-major
  double sup_value = kInf;                            // sup |g|
  std::vector<double> sup_grad;                       // sup |d_i g|
};

OuterMap outer_identity();
OuterMap outer_linear(std::vector<double> a);
OuterMap outer_constant(double v, int arity = 1);
OuterMap outer_sin();
OuterMap outer_tanh();
OuterMap outer_gauss_bump();  // exp(-y^2)
OuterMap outer_product();     // y_1 y_2
/// tanh(sum_i a_i y_i)
OuterMap outer_tanh_sum(std::vector<double> a);
/// sin(y_1) cos(y_2)
OuterMap outer_sin_cos();

struct CylinderFunction {
  std::vector<TestFunction> inner;
  OuterMap outer;

  /// Throws ConfigError when arity and inner count disagree.
  void validate() const;
  bool is_constant() const { return outer.name == "constant"; }
};

/// g o (u_1, ..., u_m) as a single cylinder over the concatenated inner lists.
CylinderFunction compose(const OuterMap& g, const std::vector<CylinderFunction>& parts);

/// Certificate bound on sup_mu |D^E u(mu)|_inf: sum_i sup|d_i g| |f_i|_inf,
/// doubled in P mode where D~ carries the centering term.
double derivative_sup_bound(const CylinderFunction& u, bool centered);

/// Cylinder with inner functions tabulated on a grid.
struct BoundCylinder {
  CylinderFunction u;
  GridPtr grid;
  std::vector<Vec> F;   // F[j][i] = f_j(x_i)
  std::vector<Vec> WF;  // W_i f_j(x_i)

  int arity() const { return static_cast<int>(F.size()); }
};

BoundCylinder bind(const CylinderFunction& u, const GridPtr& grid);

/// y_j = mu(f_j)
Vec inner_values(const BoundCylinder& u, const GridDensity& mu);

double eval_cylinder(const BoundCylinder& u, const GridDensity& mu);
double eval_cylinder(const CylinderFunction& u, const GridDensity& mu);

/// x -> sum_i d_i g(y) f_i(x)
Vec extrinsic_derivative(const BoundCylinder& u, const GridDensity& mu);
Vec extrinsic_derivative(const CylinderFunction& u, const GridDensity& mu);

/// x -> sum_i d_i g(y) (f_i(x) - y_i); requires a probability measure.
Vec convexity_derivative(const BoundCylinder& u, const GridDensity& mu);
Vec convexity_derivative(const CylinderFunction& u, const GridDensity& mu);

/// The pair (q, phi) with declared growth constants.
struct PotentialSpec {
  std::string name = "none";
  std::function<double(double)> q;        // on [0, inf)
  std::function<double(double)> q_prime; // on (0, inf)
  std::function<double(const Point&)> phi;  // null means phi = 0
  double theta = 2.0;
  double c = 1.0;       // -c s^{1/2} <= q(s) <= c (1 + s^theta)
  double alpha1 = 0.0;  // |phi| <= alpha1 (1 + |x|^{2k})
  double K = 0.0;       // |phi| <= K (1 + |x|^k)
  std::optional<double> c_phi;  // lambda(exp(-phi)) when finite

  bool is_none() const { return !q && !phi; }
};

inline constexpr double kQPrimeFloor = 1e-300;
inline constexpr double kPayloadCutoff = 1e-150;

PotentialSpec potential_none();
/// Ent(mu) = lambda(h ln h) - mu(M): q(s) = s ln s - s.
PotentialSpec potential_entropy();

enum class PhiKind { Zero, Quadratic, SoftAbs };
/// q(s) = s ln s with phi = 0, a|x|^2 or a sqrt(1 + |x|^2).
PotentialSpec potential_relative_entropy(PhiKind kind, double a, int d);
/// q(s) = s^theta / theta
PotentialSpec potential_power(double theta);
/// q(s) = a s
PotentialSpec potential_linear(double a);

/// q_n(s) = q((1 + n s)/(n + s)), phi_n = clamp(phi, -n, n).
PotentialSpec approx_potential(const PotentialSpec& pot, int n);

/// Guarded q'(max(s, floor)).
double q_prime_guarded(const PotentialSpec& pot, double s);

/// 2 x q'(x^2), zero for |x| < kPayloadCutoff. This is the lift-space drift
/// payload; for the entropy it is 2 x ln(x^2), continuous at 0.
double drift_payload(const PotentialSpec& pot, double x);

struct CertificateReport {
  double q_lower_slack;      // min over samples of q(s) + c s^{1/2}
  double q_upper_slack;      // min over samples of c (1 + s^theta) - q(s)
  double q_prime_ratio;      // max |q'(s)| / (s^{-1/2} + s^{theta-1})
  double q_prime_sq_ratio;   // max |q'(s^2)| / (s^{-1/2} + s^{theta-1})
  double phi_slack;          // min over sampled x of the (PH) bound minus |phi|
  bool ok;
};

/// Checks the declared growth constants by sampling s on a log grid and x on
/// a box. `k` is the smoothness exponent of the spectral config.
CertificateReport check_certificates(const PotentialSpec& pot, double k, int d);

/// Throws ConfigError when check_certificates fails.
void validate_certificates(const PotentialSpec& pot, double k, int d);

/// Potential with phi tabulated on a grid.
struct BoundPotential {
  PotentialSpec pot;
  GridPtr grid;
  Vec phi;  // empty when phi = 0
};

BoundPotential bind(const PotentialSpec& pot, const GridPtr& grid);

/// lambda(q o h) + mu(phi); +inf when the quadrature payload is non-finite.
double eval_beta(const BoundPotential& pot, const GridDensity& mu);
double eval_beta(const PotentialSpec& pot, const GridDensity& mu);

/// q'(h) + phi
Vec beta_derivative_M(const BoundPotential& pot, const GridDensity& mu);
Vec beta_derivative_M(const PotentialSpec& pot, const GridDensity& mu);

/// q'(h) + phi - mu(q'(h) + phi); requires a probability measure.
Vec beta_derivative_P(const BoundPotential& pot, const GridDensity& mu);
Vec beta_derivative_P(const PotentialSpec& pot, const GridDensity& mu);

}  // namespace mflow
