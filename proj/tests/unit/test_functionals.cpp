#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mflow/errors.hpp"
#include "mflow/lift.hpp"
#include "oracles.hpp"

using namespace mflow;

namespace {

SpectralBasis basis1(int N = 8) {
  SpectralConfig cfg;
  cfg.trunc = N;
  return SpectralBasis(cfg);
}

CylinderFunction sample_cylinder() {
  CylinderFunction u;
  u.inner = {test_hermite({0}), test_gaussian({0.5, 0.0}, 1.2, 1)};
  u.outer = outer_sin_cos();
  return u;
}

// mu + eps delta_{x_i}, as a grid density.
GridDensity add_point_mass(const GridDensity& mu, std::size_t i, double eps) {
  Vec h = mu.h;
  h[i] += eps / mu.grid->weights[i];
  return GridDensity::from_values(mu.grid, h);
}

}  // namespace

TEST_SUITE("functionals") {
TEST_CASE("outer maps: gradients match finite differences") {
  for (const OuterMap& g : {outer_sin(), outer_tanh(), outer_gauss_bump(), outer_product(),
                            outer_tanh_sum({0.7, -0.4, 0.2}), outer_sin_cos(), outer_linear({2.0, -1.0})}) {
    std::vector<double> y(g.arity), gr(g.arity);
    for (int i = 0; i < g.arity; ++i) y[i] = 0.3 + 0.2 * i;
    g.grad(y.data(), gr.data());
    for (int i = 0; i < g.arity; ++i) {
      auto yp = y, ym = y;
      yp[i] += 1e-6;
      ym[i] -= 1e-6;
      CHECK(gr[i] == doctest::Approx((g.value(yp.data()) - g.value(ym.data())) / 2e-6).epsilon(1e-7));
    }
  }
}

TEST_CASE("extrinsic derivative is the rate of adding point mass") {
  const auto b = basis1();
  const CylinderFunction u = sample_cylinder();
  const GridDensity mu = push_forward_M({0.6, 0.3, -0.2, 0.1, 0, 0, 0, 0}, b);
  const Vec D = extrinsic_derivative(u, mu);
  for (std::size_t i : {1u, 5u, 9u, 14u}) {
    const double e = 1e-4 * mu.h[i] * mu.grid->weights[i];
    const double fd = (eval_cylinder(u, add_point_mass(mu, i, e)) - eval_cylinder(u, add_point_mass(mu, i, -e))) / (2 * e);
    CHECK(D[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("convexity derivative is the rate along (1-eps) mu + eps delta") {
  const auto b = basis1();
  const CylinderFunction u = sample_cylinder();
  const GridDensity mu = push_forward_P({0.6, 0.3, -0.2, 0.1, 0, 0, 0, 0}, b);
  const Vec D = convexity_derivative(u, mu);
  for (std::size_t i : {9u, 12u, 14u}) {
    const double e = std::min(1e-5, 0.5 * mu.h[i] * mu.grid->weights[i]);
    Vec hp = mu.h, hm = mu.h;
    for (std::size_t k = 0; k < hp.size(); ++k) {
      hp[k] *= 1 - e;
      hm[k] *= 1 + e;
    }
    hp[i] += e / mu.grid->weights[i];
    hm[i] -= e / mu.grid->weights[i];
    const double fd = (eval_cylinder(u, GridDensity::from_values(mu.grid, hp)) -
                       eval_cylinder(u, GridDensity::from_values(mu.grid, hm))) / (2 * e);
    CHECK(D[i] == doctest::Approx(fd).epsilon(1e-6));
  }
  const GridDensity m = push_forward_M({0.6, 0.3, -0.2, 0.1, 0, 0, 0, 0}, b);
  CHECK_THROWS(convexity_derivative(u, m));
}

TEST_CASE("derivative sup bound dominates sampled derivatives") {
  const auto b = basis1();
  const CylinderFunction u = sample_cylinder();
  const double bound = derivative_sup_bound(u, false);
  CHECK(derivative_sup_bound(u, true) == doctest::Approx(2 * bound));
  const GridDensity mu = push_forward_M({1.0, 0.5, 0.2, 0, 0, 0, 0, 0}, b);
  for (double x : extrinsic_derivative(u, mu)) CHECK(std::fabs(x) <= bound + 1e-12);
}

TEST_CASE("compose flattens inner lists") {
  const CylinderFunction a = sample_cylinder();
  CylinderFunction c;
  c.inner = {test_tanh_window(-1, 1, 0.5)};
  c.outer = outer_tanh();
  const CylinderFunction w = compose(outer_product(), {a, c});
  CHECK(w.inner.size() == 3u);
  const auto b = basis1();
  const GridDensity mu = push_forward_M({0.4, 0.1, 0.3, 0, 0, 0, 0, 0}, b);
  CHECK(eval_cylinder(w, mu) == doctest::Approx(eval_cylinder(a, mu) * eval_cylinder(c, mu)));
  CylinderFunction bad = a;
  bad.inner.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("entropy of a gaussian density has the closed form") {
  // h = N(0, 1/2) density: lambda(h ln h) - lambda(h) = -1/2 ln(pi e) - 1.
  const auto b = basis1(12);
  Vec h(b.n_nodes());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = b.grid()->nodes[i][0];
    h[i] = std::exp(-x * x) / std::sqrt(std::numbers::pi);
  }
  const GridDensity mu = GridDensity::from_values(b.grid(), h);
  CHECK(eval_beta(potential_entropy(), mu) == doctest::Approx(oracle::gaussian_entropy_functional(0.5)).epsilon(1e-12));
}

TEST_CASE("potential derivative matches point-mass finite differences") {
  const auto b = basis1();
  const GridDensity mu = push_forward_M({0.8, 0.2, -0.3, 0.1, 0.05, 0, 0, 0}, b);
  for (const PotentialSpec& pot : {potential_entropy(), potential_power(2.0), potential_linear(1.5),
                                   potential_relative_entropy(PhiKind::SoftAbs, 1.0, 1)}) {
    const Vec D = beta_derivative_M(pot, mu);
    for (std::size_t i : {3u, 7u, 10u}) {
      const double e = 1e-5 * mu.h[i] * mu.grid->weights[i];
      const double fd = (eval_beta(pot, add_point_mass(mu, i, e)) - eval_beta(pot, add_point_mass(mu, i, -e))) / (2 * e);
      CHECK(D[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("centered potential derivative integrates to zero") {
  const auto b = basis1();
  const GridDensity mu = push_forward_P({0.8, 0.2, -0.3, 0.1, 0.05, 0, 0, 0}, b);
  CHECK(std::fabs(integrate_against(mu, beta_derivative_P(potential_entropy(), mu))) < 1e-12);
}

TEST_CASE("growth certificates") {
  CHECK(check_certificates(potential_entropy(), 1.0, 1).ok);
  CHECK(check_certificates(potential_power(2.0), 1.0, 1).ok);
  CHECK(check_certificates(potential_relative_entropy(PhiKind::SoftAbs, 1.0, 2), 1.0, 2).ok);
  PotentialSpec bad = potential_power(3.0);
  bad.theta = 2.0;
  CHECK_FALSE(check_certificates(bad, 1.0, 1).ok);
  CHECK_THROWS_AS(validate_certificates(bad, 1.0, 1), ConfigError);
}

TEST_CASE("softabs normalizer matches quadrature") {
  const PotentialSpec pot = potential_relative_entropy(PhiKind::SoftAbs, 1.0, 1);
  REQUIRE(pot.c_phi.has_value());
  CHECK(*pot.c_phi == doctest::Approx(oracle::softabs_partition_1d(1.0)).epsilon(1e-8));
}

TEST_CASE("entropy drift payload is continuous at zero") {
  const PotentialSpec pot = potential_entropy();
  CHECK(drift_payload(pot, 0.0) == 0.0);
  CHECK(std::fabs(drift_payload(pot, 1e-12)) < 1e-9);
  CHECK(drift_payload(pot, 0.5) == doctest::Approx(2 * 0.5 * std::log(0.25)));
}

TEST_CASE("approximating potentials converge pointwise") {
  const PotentialSpec pot = potential_entropy();
  const PotentialSpec a = approx_potential(pot, 1000000);
  for (double s : {0.1, 1.0, 3.0}) CHECK(a.q(s) == doctest::Approx(pot.q(s)).epsilon(1e-4));
}
}
