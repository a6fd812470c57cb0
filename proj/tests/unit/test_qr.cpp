#include <doctest.h>

#include <cmath>

#include "mflow/errors.hpp"
#include "mflow/gaussian.hpp"
#include "mflow/qr_toolkit.hpp"
#include "oracles.hpp"

using namespace mflow;

TEST_SUITE("qr") {
TEST_CASE("k-functional small cases") {
  // weights {1/2, 1/2} at values (4, 1): 4/2 + 1/2
  CHECK(k_functional({4.0, 1.0}, {0.5, 0.5}) == doctest::Approx(2.5));
  // total mass above 1 truncates at the largest values
  CHECK(k_functional({4.0, -1.0}, {0.75, 2.0}) == doctest::Approx(3.0 + 0.25));
  CHECK(k_functional(Vec{}, Vec{}) == 0.0);
  CHECK_THROWS_AS(k_functional({1.0}, {-0.1}), DegenerateInput);
}

TEST_CASE("k-functional matches the threshold oracle") {
  for (std::uint64_t i = 0; i < 100; ++i) {
    RandomStream rng(21, streams::kAudit, i);
    const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 10);
    std::vector<double> g(m), w(m);
    for (std::size_t j = 0; j < m; ++j) {
      g[j] = 2 * rng.normal();
      w[j] = 0.5 * rng.uniform();
    }
    CHECK(k_functional(g, w) == doctest::Approx(oracle::k_functional_threshold(g, w)).epsilon(1e-9));
  }
}

TEST_CASE("cutoff functions") {
  CHECK(cutoff_chi(-3.0) == -1.5);
  CHECK(cutoff_chi(0.4) == 0.4);
  CHECK(cutoff_chi(1.5) == doctest::Approx(1.375));
  CHECK(cutoff_chi(5.0) == 1.5);
  CHECK(cutoff_kappa(-1.0) == 0.0);
  CHECK(cutoff_kappa(0.5) == 0.125);
  CHECK(cutoff_kappa(1.5) == doctest::Approx(0.875));
  CHECK(cutoff_kappa(3.0) == 1.0);
  CHECK(cutoff_chi_l(-0.5, 2.0) == 0.0);
  CHECK(cutoff_chi_l(1.5, 2.0) == 1.5);
  CHECK(cutoff_chi_l(4.0, 2.0) == doctest::Approx(0.0).scale(1e-12));
  CHECK_THROWS_AS(cutoff_chi_l(0.5, 0.5), ConfigError);
  // C^1 joins
  const double h = 1e-6;
  auto slopes_agree = [h](auto f, double s) {
    return std::fabs((f(s + h) - f(s)) / h - (f(s) - f(s - h)) / h) < 1e-5;
  };
  for (double s : {-2.0, -1.0, 1.0, 2.0}) {
    CHECK(cutoff_chi(s - 1e-9) == doctest::Approx(cutoff_chi(s + 1e-9)).epsilon(1e-8));
    CHECK(slopes_agree(cutoff_chi, s));
  }
  for (double s : {0.0, 1.0, 2.0}) CHECK(slopes_agree(cutoff_kappa, s));
  for (double s : {2.0, 4.0}) CHECK(slopes_agree([](double t) { return cutoff_chi_l(t, 2.0); }, s));
}

TEST_CASE("separating family members and products") {
  const auto anchors = halton_anchors(1, 8);
  CHECK(anchors[0][0] == 0.0);
  CHECK(anchors[1][0] == -1.5);
  const SeparatingFamily fam = separating_family(anchors, 1, 64);
  CHECK(fam.size() == 64u);
  CHECK(fam.members[0] == std::vector<int>(8, 0));
  const Point x{0.37, 0.0};
  CHECK(fam.eval(0, x) == 1.0);
  std::vector<int> e0(8, 0), e1(8, 0), e01(8, 0);
  e0[0] = 1;
  e1[1] = 1;
  e01[0] = e01[1] = 1;
  const auto i0 = fam.index_of(e0), i1 = fam.index_of(e1), i01 = fam.index_of(e01);
  REQUIRE(i0);
  REQUIRE(i1);
  REQUIRE(i01);
  CHECK(fam.eval(*i01, x) == fam.eval(*i0, x) * fam.eval(*i1, x));
  CHECK_THROWS_AS(separating_family(halton_anchors(1, 4), 1, 64), ConfigError);
  CHECK_THROWS_AS(separating_family(anchors, 1, 16), ConfigError);
}

TEST_CASE("separation of identical and rescaled measures") {
  SpectralConfig cfg;
  cfg.trunc = 6;
  const SpectralBasis b(cfg);
  const SeparatingFamily fam = separating_family(halton_anchors(1, 8), 1, 64);
  const CoeffVector c{0.5, 0.1, -0.2, 0.3, 0.0, 0.1};
  CoeffVector c2 = c;
  for (double& x : c2) x *= 2.0;
  const auto r = separation_test({{push_forward_M(c, b), push_forward_M(c, b)},
                                  {push_forward_M(c, b), push_forward_M(c2, b)},
                                  {push_forward_P(c, b), push_forward_P(c2, b)}},
                                 fam);
  CHECK(r.records[0].member == -1);
  CHECK(r.records[1].member == 0);  // the constant member sees the mass
  CHECK(r.records[2].member == -1);
  CHECK(r.unseparated == 2u);
}

TEST_CASE("qr_bound from declared bounds") {
  // mu(f) with f = e_0: sup |d g| = 1, |f| <= pi^{-1/4}; identity has no sup bound
  CylinderFunction u;
  u.inner = {test_hermite({0})};
  u.outer = outer_sin();
  const QrBound b = qr_bound(u, Mode::M);
  CHECK(b.sup_u == 1.0);
  CHECK(b.derivative == doctest::Approx(std::pow(M_PI, -0.25)));
  CHECK(b.total == doctest::Approx(1.0 + std::pow(M_PI, -0.5)));
  CHECK(qr_bound(u, Mode::P).derivative == doctest::Approx(2 * std::pow(M_PI, -0.25)));
  u.outer = outer_identity();
  CHECK_THROWS_AS(qr_bound(u, Mode::M), ConfigError);
}

TEST_CASE("composition bound at sampled measures") {
  const auto spec = GaussianSpec::make([] {
    SpectralConfig c;
    c.trunc = 6;
    return c;
  }());
  CylinderFunction a, z;
  a.inner = {test_gaussian({0.2, 0}, 1.0, 1)};
  a.outer = outer_sin();
  z.inner = {test_tanh_window(-1, 1, 0.3)};
  z.outer = outer_tanh();
  for (Mode mode : {Mode::M, Mode::P})
    for (std::size_t i = 0; i < 20; ++i) {
      const GridDensity mu = push_forward(sample_g(spec, 5, i), *spec.basis, mode);
      CHECK(lip_composition_check(outer_sin_cos(), {a, z}, mu, mode, 1e-12).ok);
    }
}

TEST_CASE("w_l uses the kappa cutoff of log mass") {
  SpectralConfig cfg;
  cfg.trunc = 4;
  const SpectralBasis b(cfg);
  const GridDensity mu = push_forward_M({2.0, 0, 0, 0}, b);
  CHECK(w_l(mu, 1.0) == doctest::Approx(cutoff_kappa(std::log(5.0) - 1.0)));
}
}
