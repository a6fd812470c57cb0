#pragma once

// Lifted functionals on coefficient space: U(c) = u(Psi(c)) and
// V(c) = beta(Psi(c)) with analytic gradients and truncated Laplacians.
//
// For u = g(y), y_j = mu(f_j) and mu = Psi(c):
//   M mode: y_j = c^T M_j c,            rho = 1
//   P mode: y_j = c^T M_j c / |c|^2,    rho = |c|^2
// where (M_j)_{nm} = lambda(f_j e_n e_m) by quadrature.

#include <cstdint>

#include "mflow/functionals.hpp"

namespace mflow {

enum class Mode { M, P };

const char* mode_name(Mode m);

/// Psi_M(c) or Psi_P(c).
GridDensity push_forward(const CoeffVector& c, const SpectralBasis& basis, Mode mode);

/// Cylinder bound to the quadrature grid with the diagonals of M_j cached.
struct LiftedCylinder {
  BoundCylinder bound;
  std::vector<Vec> diag;  // diag[j][n] = (M_j)_{nn}
};

LiftedCylinder lift(const CylinderFunction& u, const SpectralBasis& basis);

struct LiftEval {
  double value = 0.0;
  Vec y;           // inner integrals
  Vec grad;        // retained-mode gradient of U
  double laplacian = 0.0;  // truncated: sum over retained modes
  Vec D;           // D^E u (M) or D~^E u (P) on the grid
};

/// order 0: value; 1: + gradient and D; 2: + Laplacian.
LiftEval evaluate(const LiftedCylinder& u, const SpectralBasis& basis, const CoeffVector& c, Mode mode,
                  int order);

/// Gradient of U in the full discrete basis: (2/rho) project_full(f D).
Vec full_gradient(const SpectralBasis& basis, const Vec& f, const Vec& D, double rho);

/// V(c) = beta(Psi(c)).
double potential_value(const BoundPotential& pot, const SpectralBasis& basis, const CoeffVector& c, Mode mode);

/// grad V over retained modes. M: project(2 f q'(f^2) + 2 phi f). P: the
/// gradient of c -> beta(Psi_P(c)). Throws NumericalError naming the node
/// when the payload is non-finite.
CoeffVector potential_gradient(const BoundPotential& pot, const SpectralBasis& basis, const CoeffVector& c,
                               Mode mode);

/// Measure-level carre du champ mu(D u D v) (D~ in P mode).
double carre_du_champ(const LiftedCylinder& u, const LiftedCylinder& v, const SpectralBasis& basis,
                      const CoeffVector& c, Mode mode);

/// Lift-level truncated carre du champ (1/4) rho^{[P]} sum_{n<N} dU dV.
double truncated_gamma(const LiftEval& u, const LiftEval& v, const CoeffVector& c, Mode mode);

}  // namespace mflow
