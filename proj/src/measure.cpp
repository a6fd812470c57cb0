#include "mflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>

#include "mflow/errors.hpp"
#include "mflow/kernels.hpp"

namespace mflow {

GridDensity GridDensity::from_values(GridPtr grid, Vec h) {
  if (!grid || h.size() != grid->size()) throw GridMismatch("density size does not match grid");
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!(h[i] >= 0.0) || !std::isfinite(h[i]))
      throw NumericalError("density value at node " + std::to_string(i) + " is negative or non-finite");
  GridDensity mu;
  mu.mass = lambda_integral(h, *grid);
  mu.grid = std::move(grid);
  mu.h = std::move(h);
  return mu;
}

GridDensity GridDensity::probability_from_values(GridPtr grid, Vec h) {
  GridDensity mu = from_values(std::move(grid), std::move(h));
  if (!(mu.mass > 0.0)) throw DegenerateInput("cannot normalize a zero-mass density");
  for (double& v : mu.h) v /= mu.mass;
  mu.mass = 1.0;
  mu.is_probability = true;
  return mu;
}

GridDensity push_forward_M(const CoeffVector& c, const SpectralBasis& basis) {
  Vec f = basis.synthesize(c);
  for (double& v : f) v *= v;
  GridDensity mu;
  mu.grid = basis.grid();
  mu.h = std::move(f);
  double n2 = 0.0;
  for (double v : c) n2 += v * v;
  mu.mass = n2;
  return mu;
}

GridDensity push_forward_P(const CoeffVector& c, const SpectralBasis& basis) {
  double n2 = 0.0;
  for (double v : c) n2 += v * v;
  if (!(n2 > kDegenerateNorm2)) throw DegenerateInput("push_forward_P is undefined at |c| ~ 0");
  Vec f = basis.synthesize(c);
  for (double& v : f) v = v * v / n2;
  GridDensity mu;
  mu.grid = basis.grid();
  mu.h = std::move(f);
  mu.mass = 1.0;
  mu.is_probability = true;
  return mu;
}

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b || a->id != b->id) throw GridMismatch("operands live on different grids");
}

namespace {

// Evaluation of the Gauss-Hermite interpolant x -> L[g e^{y^2}](x) e^{-x^2}
// at uniform points, as a dense (points x nodes) matrix. Barycentric weights
// of the Hermite nodes are (-1)^j sqrt(w_j).
struct TvPlan {
  std::size_t Q = 0;
  std::size_t M = 0;  // uniform points per axis
  double step = 0.0;
  Vec K;              // M x Q
};

std::shared_ptr<const TvPlan> make_tv_plan(const Grid& g) {
  auto plan = std::make_shared<TvPlan>();
  const std::size_t Q = g.d == 1 ? g.size() : static_cast<std::size_t>(std::llround(std::sqrt(g.size())));
  Vec x(Q), half_lw(Q);
  for (std::size_t j = 0; j < Q; ++j) {
    x[j] = g.d == 1 ? g.nodes[j][0] : g.nodes[j * Q][0];
    half_lw[j] = 0.5 * (g.d == 1 ? g.log_weights[j] : 0.5 * g.log_weights[j * Q + j]);
  }
  const double L = std::max(x.back(), 9.0);
  plan->Q = Q;
  plan->M = g.d == 1 ? 4001 : 1201;
  plan->step = 2.0 * L / static_cast<double>(plan->M - 1);
  plan->K.assign(plan->M * Q, 0.0);
  for (std::size_t m = 0; m < plan->M; ++m) {
    const double t = -L + plan->step * static_cast<double>(m);
    double* row = plan->K.data() + m * Q;
    std::size_t hit = Q;
    for (std::size_t j = 0; j < Q; ++j)
      if (std::fabs(t - x[j]) < 1e-13) hit = j;
    if (hit < Q) {
      row[hit] = 1.0;
      continue;
    }
    double den = 0.0;
    for (std::size_t j = 0; j < Q; ++j) {
      const double b = ((j & 1) ? -1.0 : 1.0) / (t - x[j]);
      den += b * std::exp(half_lw[j]);
      row[j] = b * std::exp(half_lw[j] + x[j] * x[j] - t * t);
    }
    for (std::size_t j = 0; j < Q; ++j) row[j] /= den;
  }
  return plan;
}

std::shared_ptr<const TvPlan> tv_plan(const Grid& g) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const TvPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[g.id];
  if (!slot) slot = make_tv_plan(g);
  return slot;
}

// Trapezoid rule for |v| with linear root location inside sign-changing cells.
double abs_trapezoid(const double* v, std::size_t n, double step) {
  double s = 0.0;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    const double a = v[m], b = v[m + 1];
    if ((a < 0.0) != (b < 0.0) && a != 0.0 && b != 0.0)
      s += (a * a + b * b) / (2.0 * (std::fabs(a) + std::fabs(b)));
    else
      s += 0.5 * (std::fabs(a) + std::fabs(b));
  }
  return s * step;
}

}  // namespace

double tv_distance(const GridDensity& mu1, const GridDensity& mu2) {
  require_same_grid(mu1.grid, mu2.grid);
  const Grid& g = *mu1.grid;
  if (g.log_weights.size() != g.size())
    return kernels::active().weighted_abs_diff(g.weights.data(), mu1.h.data(), mu2.h.data(), mu1.h.size());
  const auto plan = tv_plan(g);
  const std::size_t Q = plan->Q, M = plan->M;
  Vec diff(g.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = mu1.h[i] - mu2.h[i];
  const auto& k = kernels::active();
  if (g.d == 1) {
    Vec v(M);
    k.gemv(plan->K.data(), M, Q, diff.data(), v.data());
    return abs_trapezoid(v.data(), M, plan->step);
  }
  // Interpolate along the first axis for every second-axis node, then along
  // the second axis one uniform row at a time.
  Vec cols(Q * M), tmp(Q), line(M), rows(M);
  for (std::size_t j = 0; j < Q; ++j) {
    for (std::size_t i = 0; i < Q; ++i) tmp[i] = diff[i * Q + j];
    k.gemv(plan->K.data(), M, Q, tmp.data(), cols.data() + j * M);
  }
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < Q; ++j) tmp[j] = cols[j * M + m];
    k.gemv(plan->K.data(), M, Q, tmp.data(), line.data());
    rows[m] = abs_trapezoid(line.data(), M, plan->step);
  }
  double s = 0.0;
  for (std::size_t m = 0; m + 1 < M; ++m) s += 0.5 * (rows[m] + rows[m + 1]);
  return s * plan->step;
}

double integrate_against(const GridDensity& mu, const Vec& f) {
  if (f.size() != mu.h.size()) throw GridMismatch("grid function has wrong length");
  return kernels::active().dot3(mu.grid->weights.data(), mu.h.data(), f.data(), f.size());
}

long Partition::cell_of(const Point& x) const {
  const double h = (b - a) / n;
  long idx = 0;
  for (int k = 0; k < d; ++k) {
    if (!(x[k] >= a && x[k] < b)) return -1;
    long j = static_cast<long>(std::floor((x[k] - a) / h));
    if (j >= n) j = n - 1;
    idx = idx * n + j;
  }
  return idx;
}

Vec sn_average(const Vec& eta, const Grid& grid, const Partition& part) {
  if (eta.size() != grid.size()) throw GridMismatch("grid function has wrong length");
  if (part.d != grid.d) throw DimensionMismatch("partition dimension does not match grid");
  if (part.n < 1 || !(part.b > part.a)) throw ConfigError("partition needs n >= 1 and b > a");
  const std::size_t nc = part.n_cells();
  Vec num(nc, 0.0), den(nc, 0.0);
  std::vector<long> cell(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cell[i] = part.cell_of(grid.nodes[i]);
    if (cell[i] < 0) continue;
    num[cell[i]] += grid.weights[i] * eta[i];
    den[cell[i]] += grid.weights[i];
  }
  for (std::size_t j = 0; j < nc; ++j)
    if (!(den[j] > 0.0)) throw DegenerateInput("partition cell " + std::to_string(j) + " holds no grid node");
  Vec out = eta;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (cell[i] >= 0) out[i] = num[cell[i]] / den[cell[i]];
  return out;
}

void write_density_csv(std::ostream& os, const GridDensity& mu) {
  os << (mu.grid->d == 1 ? "x,weight,h\n" : "x,y,weight,h\n");
  os.precision(17);
  for (std::size_t i = 0; i < mu.h.size(); ++i) {
    const Point& p = mu.grid->nodes[i];
    os << p[0] << ',';
    if (mu.grid->d == 2) os << p[1] << ',';
    os << mu.grid->weights[i] << ',' << mu.h[i] << '\n';
  }
}

}  // namespace mflow
