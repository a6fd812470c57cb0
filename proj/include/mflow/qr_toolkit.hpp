#pragma once

// Ingredients of the quasi-regularity criterion: the L^1 + L^inf
// K-functional, cutoff functions, a separating family of test functions and
// analytic derivative bounds for cylinder functions.

#include <optional>
#include <string>
#include <vector>

#include "mflow/lift.hpp"

namespace mflow {

/// |g|_{L^1(mu) + L^inf(mu)} = int_0^{1 ^ mu(M)} g*(t) dt for the discrete
/// measure sum_i w_i delta_i. Throws DegenerateInput on negative weights.
double k_functional(const Vec& g, const Vec& weights);

/// Same for a grid density: weights W_i h_i.
double k_functional(const GridDensity& mu, const Vec& g);

/// -3/2 for s <= -2, s on [-1, 1], 3/2 for s >= 2, C^1 quadratic joins.
double cutoff_chi(double s);
/// 0 for s <= 0, s^2/2 on [0, 1], 2s - s^2/2 - 1 on [1, 2], 1 for s >= 2.
double cutoff_kappa(double s);
/// s on [0, l], C^1 cubic taper to 0 on [l, 2l], 0 elsewhere. Requires l >= 1.
double cutoff_chi_l(double s, double l);
/// kappa(ln(1 + mu(M)) - l). Requires l >= 1.
double w_l(const GridDensity& mu, double l);

/// n points of the Halton sequence (bases 2, 3) mapped to [-3, 3]^d.
std::vector<Point> halton_anchors(int d, std::size_t n);

/// f_m(x) = prod_i (1/2 + (|x - x_i| ^ 1/2))^{m_i}; member 0 is f_0 = 1.
struct SeparatingFamily {
  int d = 1;
  std::vector<Point> anchors;
  std::vector<std::vector<int>> members;  // exponent sequences, graded-lex

  std::size_t size() const { return members.size(); }
  double eval(std::size_t member, const Point& x) const;
  Vec tabulate(std::size_t member, const Grid& grid) const;
  /// Index of the member with exponents m, if it is within the budget.
  std::optional<std::size_t> index_of(const std::vector<int>& m) const;
};

/// Members in graded order up to `budget`. Requires >= 8 anchors, budget >= 32.
SeparatingFamily separating_family(std::vector<Point> anchors, int d, std::size_t budget);

struct SeparationRecord {
  std::size_t pair = 0;
  long member = -1;  // first separating member, -1 when none
  double gap = 0.0;  // |mu1(f_m) - mu2(f_m)| at that member (max gap when none)
};

struct SeparationReport {
  std::vector<SeparationRecord> records;
  std::size_t unseparated = 0;
};

SeparationReport separation_test(const std::vector<std::pair<GridDensity, GridDensity>>& pairs,
                                 const SeparatingFamily& fam, double threshold = 1e-10);

/// CSV columns: pair, member, gap.
void write_separation_csv(const SeparationReport& r, const std::string& path);

struct QrBound {
  double sup_u = kInf;       // |u|_inf
  double derivative = kInf;  // bound on sup_mu |D^E u|_inf (centered and doubled in P mode)
  double total = kInf;       // derivative^2 + sup_u^2
};

/// Analytic bound from declared sup bounds. Throws ConfigError when a bound
/// is missing or infinite.
QrBound qr_bound(const CylinderFunction& u, Mode mode);

/// Largest |D^E u(mu)| (D~ in P mode) over the grid nodes.
double sampled_derivative_sup(const BoundCylinder& u, const GridDensity& mu, Mode mode);

struct LipReport {
  double lhs_inf = 0.0;  // |D^E (g o u)(mu)| over the grid
  double rhs_inf = 0.0;  // (sum_i sup|d_i g|) max_i |D^E u_i(mu)|_inf
  double lhs_l1 = 0.0;   // same quantities in L^1(mu)
  double rhs_l1 = 0.0;
  bool ok = false;
};

/// Composition bound for g o (u_1, ..., u_n) at one measure.
LipReport lip_composition_check(const OuterMap& g, const std::vector<CylinderFunction>& parts,
                                const GridDensity& mu, Mode mode, double tol);

}  // namespace mflow
