#include "mflow/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

#include "mflow/errors.hpp"
#include "mflow/kernels.hpp"

namespace mflow {

namespace {

std::uint64_t next_grid_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

void SpectralConfig::validate() const {
  if (d != 1 && d != 2) throw ConfigError("spectral.d must be 1 or 2, got " + std::to_string(d));
  if (!(alpha > 0.0)) throw ConfigError("spectral.alpha must be > 0");
  if (!(k > 0.5 * d)) throw ConfigError("spectral.k must exceed d/2");
  if (!(d_prime > d)) throw ConfigError("spectral.d_prime must exceed d");
  if (trunc < 1 || trunc > 32) throw ConfigError("spectral.trunc must lie in [1, 32]");
  if (quad_order != 0 && quad_order < 2 * trunc + 8)
    throw ConfigError("spectral.quad_order must be >= 2*trunc + 8");
  if (resolved_quad_order() > 400) throw ConfigError("spectral.quad_order must be <= 400");
}

double t_alpha_eigenvalue(const MultiIndex& n, const SpectralConfig& cfg) {
  if (static_cast<int>(n.size()) != cfg.d)
    throw DimensionMismatch("multi-index length " + std::to_string(n.size()) +
                            " does not match d = " + std::to_string(cfg.d));
  long total = 0;
  for (int v : n) {
    if (v < 0) throw DimensionMismatch("multi-index entries must be >= 0");
    total += v;
  }
  return 2.0 * static_cast<double>(total) + cfg.d + cfg.alpha;
}

void hermite_table(int nmax, double y, double* out) {
  out[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
  if (nmax == 0) return;
  out[1] = std::numbers::sqrt2 * y * out[0];
  for (int k = 1; k < nmax; ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * y * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

double hermite_eval(int n, double y) {
  if (n < 0) return 0.0;
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  hermite_table(n, y, t.data());
  return t[static_cast<std::size_t>(n)];
}

double hermite_derivative(int n, double y) {
  std::vector<double> t(static_cast<std::size_t>(n) + 2);
  hermite_table(n + 1, y, t.data());
  const double up = std::sqrt((n + 1.0) / 2.0) * t[static_cast<std::size_t>(n) + 1];
  const double down = n > 0 ? std::sqrt(n / 2.0) * t[static_cast<std::size_t>(n) - 1] : 0.0;
  return down - up;
}

GaussHermite1D gauss_hermite_1d(int Q) {
  if (Q < 1) throw ConfigError("quadrature order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(Q);
  Eigen::VectorXd sub(std::max(Q - 1, 0));
  for (int k = 1; k < Q; ++k) sub[k - 1] = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  GaussHermite1D gh;
  gh.nodes.resize(Q);
  gh.weights.resize(Q);
  gh.log_weights.resize(Q);
  std::vector<double> t(static_cast<std::size_t>(Q) + 1);
  for (int i = 0; i < Q; ++i) {
    double x = es.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      hermite_table(Q, x, t.data());
      const double val = t[Q];
      const double der = std::sqrt(2.0 * Q) * t[Q - 1] - x * val;
      if (der == 0.0) break;
      const double step = val / der;
      x -= step;
      if (std::fabs(step) < 1e-16 * std::max(1.0, std::fabs(x))) break;
    }
    hermite_table(Q - 1, x, t.data());
    const double p = t[Q - 1];
    gh.nodes[i] = x;
    gh.weights[i] = 1.0 / (Q * p * p);
    gh.log_weights[i] = std::log(gh.weights[i]) - x * x;
  }
  // Symmetrize so that odd integrands vanish to rounding.
  for (int i = 0; i < Q / 2; ++i) {
    const int j = Q - 1 - i;
    const double x = 0.5 * (gh.nodes[j] - gh.nodes[i]);
    const double w = 0.5 * (gh.weights[i] + gh.weights[j]);
    gh.nodes[i] = -x;
    gh.nodes[j] = x;
    gh.weights[i] = gh.weights[j] = w;
    gh.log_weights[i] = gh.log_weights[j] = std::log(w) - x * x;
  }
  if (Q % 2 == 1) {
    const int m = Q / 2;
    gh.nodes[m] = 0.0;
    gh.log_weights[m] = std::log(gh.weights[m]);
  }
  return gh;
}

GridPtr make_gauss_hermite_grid(int d, int Q) {
  const GaussHermite1D gh = gauss_hermite_1d(Q);
  auto g = std::make_shared<Grid>();
  g->d = d;
  g->id = next_grid_id();
  if (d == 1) {
    for (int i = 0; i < Q; ++i) {
      g->nodes.push_back({gh.nodes[i], 0.0});
      g->weights.push_back(gh.weights[i]);
      g->log_weights.push_back(gh.log_weights[i]);
    }
  } else if (d == 2) {
    for (int i = 0; i < Q; ++i)
      for (int j = 0; j < Q; ++j) {
        g->nodes.push_back({gh.nodes[i], gh.nodes[j]});
        g->weights.push_back(gh.weights[i] * gh.weights[j]);
        g->log_weights.push_back(gh.log_weights[i] + gh.log_weights[j]);
      }
  } else {
    throw ConfigError("grid dimension must be 1 or 2");
  }
  return g;
}

GridPtr make_uniform_grid(int d, double a, double b, int n) {
  if (!(b > a) || n < 1) throw ConfigError("uniform grid needs b > a and n >= 1");
  if (d != 1 && d != 2) throw ConfigError("grid dimension must be 1 or 2");
  auto g = std::make_shared<Grid>();
  g->d = d;
  g->id = next_grid_id();
  const double h = (b - a) / n;
  const double w = d == 1 ? h : h * h;
  for (int i = 0; i < n; ++i) {
    const double x = a + (i + 0.5) * h;
    if (d == 1) {
      g->nodes.push_back({x, 0.0});
      g->weights.push_back(w);
    } else {
      for (int j = 0; j < n; ++j) {
        g->nodes.push_back({x, a + (j + 0.5) * h});
        g->weights.push_back(w);
      }
    }
  }
  return g;
}

double lambda_integral(const Vec& values, const Grid& grid) {
  if (values.size() != grid.size()) throw GridMismatch("integrand size does not match grid");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw NumericalError("non-finite integrand at node " + std::to_string(i));
  return kernels::active().dot(grid.weights.data(), values.data(), values.size());
}

SpectralBasis::SpectralBasis(const SpectralConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Q_ = cfg_.resolved_quad_order();
  const int N = cfg_.trunc;
  if (cfg_.d == 1) {
    for (int n = 0; n < N; ++n) modes_.push_back({n});
  } else {
    for (int total = 0; total <= 2 * (N - 1); ++total)
      for (int n1 = 0; n1 < N; ++n1) {
        const int n2 = total - n1;
        if (n2 >= 0 && n2 < N) modes_.push_back({n1, n2});
      }
  }
  for (const auto& m : modes_) {
    eig_.push_back(t_alpha_eigenvalue(m, cfg_));
    full_index_.push_back(cfg_.d == 1 ? static_cast<std::size_t>(m[0])
                                      : static_cast<std::size_t>(m[0]) * Q_ + m[1]);
  }

  gh_ = gauss_hermite_1d(Q_);
  grid_ = make_gauss_hermite_grid(cfg_.d, Q_);

  full1d_.assign(static_cast<std::size_t>(Q_) * Q_, 0.0);
  for (int i = 0; i < Q_; ++i) hermite_table(Q_ - 1, gh_.nodes[i], full1d_.data() + i * Q_);

  const std::size_t M = grid_->size();
  table_.assign(modes_.size() * M, 0.0);
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    double* row = table_.data() + m * M;
    if (cfg_.d == 1) {
      for (int i = 0; i < Q_; ++i) row[i] = full1d_[i * Q_ + modes_[m][0]];
    } else {
      for (int i = 0; i < Q_; ++i)
        for (int j = 0; j < Q_; ++j)
          row[i * Q_ + j] = full1d_[i * Q_ + modes_[m][0]] * full1d_[j * Q_ + modes_[m][1]];
    }
  }
}

void SpectralBasis::synthesize(const double* c, double* f) const {
  kernels::active().gemv_t(table_.data(), modes_.size(), n_nodes(), c, f);
}

Vec SpectralBasis::synthesize(const CoeffVector& c) const {
  if (c.size() != n_modes()) throw DimensionMismatch("coefficient vector has wrong length");
  Vec f(n_nodes());
  synthesize(c.data(), f.data());
  return f;
}

void SpectralBasis::project(const double* g, double* a, double* scratch) const {
  const std::size_t M = n_nodes();
  std::vector<double> local;
  if (scratch == nullptr) {
    local.resize(M);
    scratch = local.data();
  }
  const auto& k = kernels::active();
  k.mul(grid_->weights.data(), g, scratch, M);
  k.gemv(table_.data(), modes_.size(), M, scratch, a);
}

CoeffVector SpectralBasis::project(const Vec& g) const {
  if (g.size() != n_nodes()) throw GridMismatch("grid function has wrong length");
  CoeffVector a(n_modes());
  project(g.data(), a.data());
  return a;
}

std::size_t SpectralBasis::n_full_modes() const {
  return cfg_.d == 1 ? static_cast<std::size_t>(Q_) : static_cast<std::size_t>(Q_) * Q_;
}

Vec SpectralBasis::project_full(const Vec& g) const {
  if (g.size() != n_nodes()) throw GridMismatch("grid function has wrong length");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> B(full1d_.data(), Q_, Q_);
  Vec wg(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) wg[i] = grid_->weights[i] * g[i];
  Vec out(n_full_modes());
  if (cfg_.d == 1) {
    Eigen::Map<const Eigen::VectorXd> v(wg.data(), Q_);
    Eigen::Map<Eigen::VectorXd>(out.data(), Q_) = B.transpose() * v;
  } else {
    Eigen::Map<const RowMat> T(wg.data(), Q_, Q_);
    Eigen::Map<RowMat>(out.data(), Q_, Q_) = B.transpose() * T * B;
  }
  return out;
}

Vec SpectralBasis::synthesize_full(const Vec& a) const {
  if (a.size() != n_full_modes()) throw DimensionMismatch("full coefficient vector has wrong length");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> B(full1d_.data(), Q_, Q_);
  Vec out(n_nodes());
  if (cfg_.d == 1) {
    Eigen::Map<const Eigen::VectorXd> v(a.data(), Q_);
    Eigen::Map<Eigen::VectorXd>(out.data(), Q_) = B * v;
  } else {
    Eigen::Map<const RowMat> A(a.data(), Q_, Q_);
    Eigen::Map<RowMat>(out.data(), Q_, Q_) = B * A * B.transpose();
  }
  return out;
}

double h_norm(const CoeffVector& c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return std::sqrt(s);
}

double hk_norm(const CoeffVector& c, const SpectralBasis& basis) {
  if (c.size() != basis.n_modes()) throw DimensionMismatch("coefficient vector has wrong length");
  const double k = basis.config().k;
  double s = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) s += std::pow(basis.eigenvalues()[n], k) * c[n] * c[n];
  return std::sqrt(s);
}

}  // namespace mflow
