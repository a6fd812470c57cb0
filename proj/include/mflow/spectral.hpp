#pragma once

// Hermite-function basis of the harmonic oscillator T_alpha = -Laplace + |x|^2 + alpha
// on R^d (d = 1, 2), Gauss-Hermite quadrature and coefficient-space norms.
//
// Weight convention: a Grid stores integration weights W_i for plain Lebesgue
// integrals, i.e. sum_i W_i g(x_i) ~ int g dx. For Gauss-Hermite grids this is
// W_i = w_i exp(|x_i|^2) ("compensated" weights), which is exact whenever
// g = exp(-|x|^2) * polynomial of per-axis degree <= 2Q-1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace mflow {

using Point = std::array<double, 2>;
using Vec = std::vector<double>;
using CoeffVector = std::vector<double>;
using MultiIndex = std::vector<int>;

struct SpectralConfig {
  int d = 1;
  double alpha = 1.0;
  double k = 1.0;
  double d_prime = 2.0;
  int trunc = 8;       // modes per axis
  int quad_order = 0;  // 0 selects 2*trunc + 8

  int resolved_quad_order() const { return quad_order > 0 ? quad_order : 2 * trunc + 8; }

  /// Throws ConfigError outside the desk-scale envelope.
  void validate() const;
};

/// 2(n_1 + ... + n_d) + d + alpha.
double t_alpha_eigenvalue(const MultiIndex& n, const SpectralConfig& cfg);

/// Normalized Hermite function xi_n(y) by the three-term recurrence.
double hermite_eval(int n, double y);

/// xi_0(y) .. xi_nmax(y) into out[0..nmax].
void hermite_table(int nmax, double y, double* out);

/// xi_n'(y) from the ladder identity sqrt(n/2) xi_{n-1} - sqrt((n+1)/2) xi_{n+1}.
double hermite_derivative(int n, double y);

/// Point set with Lebesgue integration weights.
struct Grid {
  int d = 1;
  std::vector<Point> nodes;
  Vec weights;
  Vec log_weights;  // Gauss-Hermite log weights ln w_i (empty for non-GH grids)
  std::uint64_t id = 0;

  std::size_t size() const { return nodes.size(); }
};
using GridPtr = std::shared_ptr<const Grid>;

struct GaussHermite1D {
  Vec nodes;
  Vec weights;      // compensated: w_i exp(x_i^2) = 1 / (Q xi_{Q-1}(x_i)^2)
  Vec log_weights;  // ln w_i
};

/// Golub-Welsch nodes with Newton polish on xi_Q.
GaussHermite1D gauss_hermite_1d(int Q);

GridPtr make_gauss_hermite_grid(int d, int Q);

/// Midpoint rule on [a,b)^d with n cells per axis.
GridPtr make_uniform_grid(int d, double a, double b, int n);

/// sum_i W_i values[i]; throws NumericalError on a non-finite value.
double lambda_integral(const Vec& values, const Grid& grid);

/// Retained Hermite modes (tensor truncation, graded-lex order) tabulated on
/// the Gauss-Hermite grid. Also exposes the full discrete basis: the first Q
/// Hermite functions per axis are exactly orthonormal under the Q-point rule,
/// so analysis/synthesis in that Q^d-dimensional basis is an exact isometry.
class SpectralBasis {
 public:
  explicit SpectralBasis(const SpectralConfig& cfg);

  const SpectralConfig& config() const { return cfg_; }
  int d() const { return cfg_.d; }
  std::size_t n_modes() const { return modes_.size(); }
  const std::vector<MultiIndex>& modes() const { return modes_; }
  const Vec& eigenvalues() const { return eig_; }
  const GridPtr& grid() const { return grid_; }
  std::size_t n_nodes() const { return grid_->size(); }
  const Vec& weights() const { return grid_->weights; }

  /// e_n at every node, contiguous per mode.
  const double* mode_row(std::size_t mode) const { return table_.data() + mode * n_nodes(); }

  /// f(x_i) = sum_n c_n e_n(x_i)
  void synthesize(const double* c, double* f) const;
  Vec synthesize(const CoeffVector& c) const;

  /// a_n = sum_i W_i g(x_i) e_n(x_i) over retained modes. `scratch` holds
  /// n_nodes() doubles, or is null.
  void project(const double* g, double* a, double* scratch = nullptr) const;
  CoeffVector project(const Vec& g) const;

  std::size_t n_full_modes() const;
  /// Position of retained mode m inside the full discrete basis.
  std::size_t full_index(std::size_t mode) const { return full_index_[mode]; }
  Vec project_full(const Vec& g) const;
  Vec synthesize_full(const Vec& a) const;

  double lambda_integral(const Vec& values) const { return mflow::lambda_integral(values, *grid_); }

 private:
  SpectralConfig cfg_;
  int Q_;
  std::vector<MultiIndex> modes_;
  Vec eig_;
  GridPtr grid_;
  GaussHermite1D gh_;
  Vec table_;      // n_modes x n_nodes
  Vec full1d_;     // Q x Q, full1d_[i*Q + n] = xi_n(x_i)
  std::vector<std::size_t> full_index_;
};

double h_norm(const CoeffVector& c);
double hk_norm(const CoeffVector& c, const SpectralBasis& basis);

}  // namespace mflow
