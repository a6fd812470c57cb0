#pragma once

#include <iosfwd>

#include "mflow/spectral.hpp"

namespace mflow {

/// Density of an absolutely continuous measure, sampled on a grid.
struct GridDensity {
  GridPtr grid;
  Vec h;
  double mass = 0.0;
  bool is_probability = false;

  /// Wraps raw node values. Throws on negative or non-finite entries; mass is
  /// the quadrature of h.
  static GridDensity from_values(GridPtr grid, Vec h);

  /// Same, rescaled to mass 1. Throws DegenerateInput on zero mass.
  static GridDensity probability_from_values(GridPtr grid, Vec h);
};

/// h = f_c^2, mass = |c|^2.
GridDensity push_forward_M(const CoeffVector& c, const SpectralBasis& basis);

/// h = f_c^2 / |c|^2. Throws DegenerateInput when |c|^2 <= 1e-12.
GridDensity push_forward_P(const CoeffVector& c, const SpectralBasis& basis);

inline constexpr double kDegenerateNorm2 = 1e-12;

void require_same_grid(const GridPtr& a, const GridPtr& b);

/// lambda(|h1 - h2|). On Gauss-Hermite grids the difference is extended by
/// its Gauss-Hermite interpolant and |.| is integrated on a fine uniform
/// grid; this is exact up to the fine rule whenever h e^{|x|^2} is a
/// polynomial of per-axis degree < Q, which covers every push-forward.
double tv_distance(const GridDensity& mu1, const GridDensity& mu2);

/// mu(f) = lambda(h f)
double integrate_against(const GridDensity& mu, const Vec& f);

/// Uniform partition of the box [a, b)^d into n^d cells.
struct Partition {
  int d = 1;
  double a = -6.0;
  double b = 6.0;
  int n = 1;

  std::size_t n_cells() const { return d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }
  /// Cell index, or -1 outside the box.
  long cell_of(const Point& x) const;
};

/// Replaces eta inside the box by its lambda-average over each cell; nodes
/// outside the box are copied. Throws DegenerateInput if a cell holds no node.
Vec sn_average(const Vec& eta, const Grid& grid, const Partition& part);

/// CSV rows "x[,y],weight,h".
void write_density_csv(std::ostream& os, const GridDensity& mu);

}  // namespace mflow
