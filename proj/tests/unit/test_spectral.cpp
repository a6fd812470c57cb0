#include <doctest.h>

#include <cmath>

#include "mflow/errors.hpp"
#include "mflow/spectral.hpp"
#include "oracles.hpp"

using namespace mflow;

TEST_SUITE("spectral") {
TEST_CASE("hermite functions match closed forms") {
  for (int n = 0; n <= 3; ++n)
    for (double y : {-4.0, -1.3, 0.0, 0.2, 2.5, 6.0})
      CHECK(hermite_eval(n, y) == doctest::Approx(oracle::hermite_closed(n, y)).epsilon(1e-13));
}

TEST_CASE("hermite derivative matches finite differences") {
  for (int n : {0, 1, 4, 9}) {
    for (double y : {-2.1, 0.3, 1.7}) {
      const double e = 1e-5;
      const double fd = (hermite_eval(n, y + e) - hermite_eval(n, y - e)) / (2 * e);
      CHECK(hermite_derivative(n, y) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("eigenvalue formula against Rayleigh quotients") {
  // [DERIVED] <xi_n, T_alpha xi_n> from a fine midpoint rule.
  SpectralConfig cfg;
  cfg.alpha = 1.0;
  for (int n : {0, 1, 2, 3, 5}) {
    const double rq = oracle::rayleigh_1d([n](double y) { return hermite_eval(n, y); }, cfg.alpha);
    CHECK(t_alpha_eigenvalue({n}, cfg) == doctest::Approx(rq).epsilon(1e-7));
  }
}

TEST_CASE("basis eigenvalues for d=1 alpha=1 N=4") {
  SpectralConfig cfg;
  cfg.trunc = 4;
  const SpectralBasis b(cfg);
  CHECK(b.eigenvalues() == Vec{2.0, 4.0, 6.0, 8.0});
}

TEST_CASE("d=2 modes are graded and eigenvalues follow |n|") {
  SpectralConfig cfg;
  cfg.d = 2;
  cfg.k = 2.0;
  cfg.d_prime = 3.0;
  cfg.alpha = 0.5;
  cfg.trunc = 5;
  const SpectralBasis b(cfg);
  REQUIRE(b.n_modes() == 25u);
  for (std::size_t m = 0; m < b.n_modes(); ++m) {
    const auto& n = b.modes()[m];
    CHECK(b.eigenvalues()[m] == 2.0 * (n[0] + n[1]) + 2.5);
  }
}

TEST_CASE("gauss-hermite rule integrates gaussian moments") {
  const auto gh = gauss_hermite_1d(40);
  // int y^{2j} e^{-y^2} dy = Gamma(j + 1/2)
  for (int j = 0; j <= 10; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
      s += gh.weights[i] * std::exp(-gh.nodes[i] * gh.nodes[i]) * std::pow(gh.nodes[i], 2 * j);
    CHECK(s == doctest::Approx(std::tgamma(j + 0.5)).epsilon(1e-12));
  }
}

TEST_CASE("gram matrix is the identity") {
  SpectralConfig cfg;
  cfg.trunc = 24;
  cfg.quad_order = 56;
  const SpectralBasis b(cfg);
  double worst = 0.0;
  for (std::size_t n = 0; n < b.n_modes(); ++n)
    for (std::size_t m = 0; m < b.n_modes(); ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < b.n_nodes(); ++i) s += b.weights()[i] * b.mode_row(n)[i] * b.mode_row(m)[i];
      worst = std::max(worst, std::fabs(s - (n == m ? 1.0 : 0.0)));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("synthesis and projection round-trip (Parseval)") {
  SpectralConfig cfg;
  cfg.d = 2;
  cfg.k = 2.0;
  cfg.d_prime = 3.0;
  cfg.trunc = 6;
  const SpectralBasis b(cfg);
  CoeffVector c(b.n_modes());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::sin(1.0 + i);
  const Vec f = b.synthesize(c);
  const CoeffVector back = b.project(f);
  Vec f2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
  double n2 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back[i] == doctest::Approx(c[i]).epsilon(1e-12));
    n2 += c[i] * c[i];
  }
  CHECK(b.lambda_integral(f2) == doctest::Approx(n2).epsilon(1e-12));
  CHECK(h_norm(c) == doctest::Approx(std::sqrt(n2)).epsilon(1e-14));
}

TEST_CASE("full discrete basis is an exact isometry") {
  SpectralConfig cfg;
  cfg.trunc = 5;
  const SpectralBasis b(cfg);
  Vec g(b.n_nodes());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::cos(0.7 * i);
  const Vec a = b.project_full(g);
  const Vec back = b.synthesize_full(a);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(g[i]).epsilon(1e-10));
  for (std::size_t m = 0; m < b.n_modes(); ++m) CHECK(b.full_index(m) < b.n_full_modes());
}

TEST_CASE("hk norm weights by eigenvalue powers") {
  SpectralConfig cfg;
  cfg.trunc = 3;
  cfg.k = 2.0;
  cfg.d_prime = 3.0;
  const SpectralBasis b(cfg);
  const CoeffVector c{1.0, 1.0, 1.0};
  CHECK(hk_norm(c, b) == doctest::Approx(std::sqrt(4.0 + 16.0 + 36.0)));
}

TEST_CASE("config envelope is enforced") {
  SpectralConfig cfg;
  cfg.trunc = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.trunc = 8;
  cfg.d = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.d = 1;
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("lambda_integral rejects non-finite values") {
  const auto g = make_uniform_grid(1, 0.0, 1.0, 4);
  CHECK(lambda_integral({1, 1, 1, 1}, *g) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lambda_integral({1, NAN, 1, 1}, *g), NumericalError);
}
}
