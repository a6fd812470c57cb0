#include "mflow/qr_toolkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>

#include "mflow/errors.hpp"

namespace mflow {

double k_functional(const Vec& g, const Vec& weights) {
  if (g.size() != weights.size()) throw DimensionMismatch("values and weights differ in length");
  std::vector<std::pair<double, double>> v;
  v.reserve(g.size());
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (weights[i] < 0.0) throw DegenerateInput("k_functional needs non-negative weights");
    if (weights[i] == 0.0) continue;
    v.emplace_back(std::fabs(g[i]), weights[i]);
    total += weights[i];
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double left = std::min(1.0, total);
  double out = 0.0;
  for (const auto& [a, w] : v) {
    if (left <= 0.0) break;
    const double take = std::min(w, left);
    out += a * take;
    left -= take;
  }
  return out;
}

double k_functional(const GridDensity& mu, const Vec& g) {
  if (g.size() != mu.h.size()) throw GridMismatch("grid function has wrong length");
  Vec w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = mu.grid->weights[i] * mu.h[i];
  return k_functional(g, w);
}

double cutoff_chi(double s) {
  if (s <= -2.0) return -1.5;
  if (s < -1.0) return -1.5 + 0.5 * (s + 2.0) * (s + 2.0);
  if (s <= 1.0) return s;
  if (s < 2.0) return -0.5 + 2.0 * s - 0.5 * s * s;
  return 1.5;
}

double cutoff_kappa(double s) {
  if (s <= 0.0) return 0.0;
  if (s <= 1.0) return 0.5 * s * s;
  if (s < 2.0) return 2.0 * s - 0.5 * s * s - 1.0;
  return 1.0;
}

double cutoff_chi_l(double s, double l) {
  if (!(l >= 1.0)) throw ConfigError("chi_l needs l >= 1");
  if (s < 0.0 || s >= 2.0 * l) return 0.0;
  if (s <= l) return s;
  const double t = (s - l) / l;
  return l * (((3.0 * t - 5.0) * t + 1.0) * t + 1.0);
}

double w_l(const GridDensity& mu, double l) {
  if (!(l >= 1.0)) throw ConfigError("w_l needs l >= 1");
  return cutoff_kappa(std::log1p(mu.mass) - l);
}

namespace {

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Non-decreasing index sequences of length k over [0, A), lexicographic.
void multisets(std::size_t A, int k, std::size_t start, std::vector<std::size_t>& cur,
               std::vector<std::vector<std::size_t>>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < A && out.size() < cap; ++i) {
    cur.push_back(i);
    multisets(A, k, i, cur, out, cap);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Point> halton_anchors(int d, std::size_t n) {
  if (d < 1 || d > 2) throw ConfigError("anchors need d in {1, 2}");
  std::vector<Point> out(n, Point{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    out[i][0] = -3.0 + 6.0 * radical_inverse(i + 1, 2);
    if (d == 2) out[i][1] = -3.0 + 6.0 * radical_inverse(i + 1, 3);
  }
  return out;
}

double SeparatingFamily::eval(std::size_t member, const Point& x) const {
  const auto& m = members.at(member);
  double v = 1.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (m[i] == 0) continue;
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (x[a] - anchors[i][a]) * (x[a] - anchors[i][a]);
    const double b = 0.5 + std::min(std::sqrt(r2), 0.5);
    for (int e = 0; e < m[i]; ++e) v *= b;
  }
  return v;
}

Vec SeparatingFamily::tabulate(std::size_t member, const Grid& grid) const {
  Vec out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(member, grid.nodes[i]);
  return out;
}

std::optional<std::size_t> SeparatingFamily::index_of(const std::vector<int>& m) const {
  for (std::size_t k = 0; k < members.size(); ++k)
    if (members[k] == m) return k;
  return std::nullopt;
}

SeparatingFamily separating_family(std::vector<Point> anchors, int d, std::size_t budget) {
  if (anchors.size() < 8) throw ConfigError("separating family needs at least 8 anchors");
  if (budget < 32) throw ConfigError("separating family needs a budget of at least 32");
  SeparatingFamily fam;
  fam.d = d;
  fam.anchors = std::move(anchors);
  const std::size_t A = fam.anchors.size();
  for (int k = 0; fam.members.size() < budget; ++k) {
    std::vector<std::vector<std::size_t>> sets;
    std::vector<std::size_t> cur;
    multisets(A, k, 0, cur, sets, budget - fam.members.size());
    for (const auto& s : sets) {
      std::vector<int> m(A, 0);
      for (std::size_t i : s) ++m[i];
      fam.members.push_back(std::move(m));
    }
  }
  return fam;
}

SeparationReport separation_test(const std::vector<std::pair<GridDensity, GridDensity>>& pairs,
                                 const SeparatingFamily& fam, double threshold) {
  SeparationReport rep;
  std::map<std::uint64_t, std::vector<Vec>> tables;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [a, b] = pairs[p];
    require_same_grid(a.grid, b.grid);
    auto& tab = tables[a.grid->id];
    if (tab.empty())
      for (std::size_t m = 0; m < fam.size(); ++m) tab.push_back(fam.tabulate(m, *a.grid));
    SeparationRecord rec;
    rec.pair = p;
    for (std::size_t m = 0; m < fam.size(); ++m) {
      const double gap = std::fabs(integrate_against(a, tab[m]) - integrate_against(b, tab[m]));
      if (gap > threshold) {
        rec.member = static_cast<long>(m);
        rec.gap = gap;
        break;
      }
      rec.gap = std::max(rec.gap, gap);
    }
    if (rec.member < 0) ++rep.unseparated;
    rep.records.push_back(rec);
  }
  return rep;
}

void write_separation_csv(const SeparationReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "pair,member,gap\n" << std::setprecision(17);
  for (const auto& rec : r.records) os << rec.pair << ',' << rec.member << ',' << rec.gap << '\n';
}

QrBound qr_bound(const CylinderFunction& u, Mode mode) {
  u.validate();
  if (!std::isfinite(u.outer.sup_value)) throw ConfigError("qr_bound needs a finite sup |g|");
  if (u.outer.sup_grad.size() != u.inner.size()) throw ConfigError("qr_bound needs declared sup |d_i g|");
  for (double s : u.outer.sup_grad)
    if (!std::isfinite(s)) throw ConfigError("qr_bound needs finite sup |d_i g|");
  for (const auto& f : u.inner)
    if (!std::isfinite(f.sup)) throw ConfigError("qr_bound needs finite sup |f_i|");
  QrBound b;
  b.sup_u = u.outer.sup_value;
  b.derivative = derivative_sup_bound(u, mode == Mode::P);
  b.total = b.derivative * b.derivative + b.sup_u * b.sup_u;
  return b;
}

namespace {

Vec derivative_of(const BoundCylinder& u, const GridDensity& mu, Mode mode) {
  return mode == Mode::P ? convexity_derivative(u, mu) : extrinsic_derivative(u, mu);
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double l1_norm(const GridDensity& mu, const Vec& v) {
  Vec a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::fabs(v[i]);
  return integrate_against(mu, a);
}

}  // namespace

double sampled_derivative_sup(const BoundCylinder& u, const GridDensity& mu, Mode mode) {
  return max_abs(derivative_of(u, mu, mode));
}

LipReport lip_composition_check(const OuterMap& g, const std::vector<CylinderFunction>& parts,
                                const GridDensity& mu, Mode mode, double tol) {
  if (static_cast<std::size_t>(g.arity) != parts.size()) throw ConfigError("outer arity and part count differ");
  const double G = std::accumulate(g.sup_grad.begin(), g.sup_grad.end(), 0.0);
  const BoundCylinder whole = mflow::bind(compose(g, parts), mu.grid);
  const Vec dw = derivative_of(whole, mu, mode);
  LipReport r;
  r.lhs_inf = max_abs(dw);
  r.lhs_l1 = l1_norm(mu, dw);
  double pi = 0.0, p1 = 0.0;
  for (const auto& u : parts) {
    const Vec du = derivative_of(mflow::bind(u, mu.grid), mu, mode);
    pi = std::max(pi, max_abs(du));
    p1 = std::max(p1, l1_norm(mu, du));
  }
  r.rhs_inf = G * pi;
  r.rhs_l1 = G * p1;
  r.ok = r.lhs_inf <= r.rhs_inf + tol && r.lhs_l1 <= r.rhs_l1 + tol;
  return r;
}

}  // namespace mflow
