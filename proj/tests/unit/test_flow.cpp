#include <doctest.h>

#include <cmath>

#include "mflow/errors.hpp"
#include "mflow/flow.hpp"
#include "oracles.hpp"

using namespace mflow;

namespace {

GaussianSpec spec_n(int N) {
  SpectralConfig c;
  c.trunc = N;
  return GaussianSpec::make(c);
}

CylinderFunction mass_fn() {
  CylinderFunction m;
  m.inner = {test_constant(1.0)};
  m.outer = outer_identity();
  return m;
}

}  // namespace

TEST_SUITE("flow") {
TEST_CASE("exact O-U step forgets its start for large dt") {
  const auto spec = spec_n(4);
  RandomStream r1(1, streams::kFlowNoise, 0), r2(1, streams::kFlowNoise, 0);
  const CoeffVector a = ou_exact_step(CoeffVector{1, 2, 3, 4}, 1e3, spec, r1);
  const CoeffVector b = ou_exact_step(CoeffVector{-5, 0, 7, 1}, 1e3, spec, r2);
  for (std::size_t n = 0; n < 4; ++n) CHECK(a[n] == doctest::Approx(b[n]).epsilon(1e-15));
}

TEST_CASE("exact O-U step is the identity in the limit dt -> 0") {
  const auto spec = spec_n(4);
  RandomStream r(1, streams::kFlowNoise, 0);
  const CoeffVector a = ou_exact_step(CoeffVector{1, 2, 3, 4}, 1e-14, spec, r);
  for (std::size_t n = 0; n < 4; ++n) CHECK(a[n] == doctest::Approx(n + 1.0).epsilon(1e-6));
}

TEST_CASE("drift steps") {
  const auto spec = spec_n(4);
  const SpectralBasis& b = *spec.basis;
  const CoeffVector c{0.3, -0.2, 0.1, 0.05};
  // linear q(s) = a s has grad V = 2 a c in M mode
  const Tilt lin = make_tilt(potential_linear(1.5), b, 0.0, Mode::M);
  const CoeffVector d = drift_step(c, 0.01, lin, b);
  for (std::size_t n = 0; n < 4; ++n) CHECK(d[n] == doctest::Approx(c[n] * (1 - 0.01 * 0.75)).epsilon(1e-12));
  const Tilt ent = make_tilt(potential_entropy(), b, 0.0, Mode::M);
  const CoeffVector g = potential_gradient(ent.pot, b, c, Mode::M);
  const CoeffVector e = drift_step(c, 0.02, ent, b);
  for (std::size_t n = 0; n < 4; ++n) CHECK(e[n] == doctest::Approx(c[n] - 0.005 * g[n]).epsilon(1e-12));
  const Tilt none = make_tilt(potential_none(), b, 0.0, Mode::M);
  CHECK(drift_step(c, 0.1, none, b) == c);
}

TEST_CASE("zero steps echo the start") {
  FlowConfig cfg(spec_n(4));
  cfg.n_steps = 0;
  const CoeffVector c0{0.1, 0.2, 0.3, 0.4};
  const Trajectory tr = simulate(cfg, c0, {cylinder_observable("mass", mass_fn(), *cfg.spec.basis)});
  REQUIRE(tr.times.size() == 1u);
  CHECK(tr.snapshots[0] == c0);
  CHECK(tr.values[0][0] == doctest::Approx(0.3));
}

TEST_CASE("simulation is deterministic and records on schedule") {
  FlowConfig cfg(spec_n(4));
  cfg.pot = potential_entropy();
  cfg.n_steps = 50;
  cfg.record_every = 10;
  cfg.dt = 1e-3;
  const auto obs = std::vector<NamedObservable>{cylinder_observable("mass", mass_fn(), *cfg.spec.basis)};
  const Trajectory a = simulate(cfg, obs, 2), b = simulate(cfg, obs, 2), c = simulate(cfg, obs, 3);
  CHECK(a.times.size() == 6u);
  CHECK(a.times.back() == doctest::Approx(0.05));
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.snapshots != c.snapshots);
}

TEST_CASE("ergodic averages do not depend on worker count") {
  FlowConfig cfg(spec_n(4));
  cfg.n_steps = 200;
  cfg.n_chains = 6;
  const auto obs = std::vector<NamedObservable>{cylinder_observable("mass", mass_fn(), *cfg.spec.basis)};
  cfg.exec = {1, 1};
  const ErgodicReport a = ergodic_averages(cfg, obs, 20, 5);
  cfg.exec = {3, 1};
  const ErgodicReport b = ergodic_averages(cfg, obs, 20, 5);
  CHECK(a.time_average[0].value == b.time_average[0].value);
  CHECK(a.time_average[0].std_error == b.time_average[0].std_error);
}

TEST_CASE("flow config validation") {
  FlowConfig cfg(spec_n(4));
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dt = 1.0;
  cfg.n_steps = 20000;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.n_steps = 10;
  cfg.mode = Mode::P;
  cfg.pot = potential_power(2.0);
  cfg.p = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.p.reset();
  CHECK(cfg.effective_p() == 8.0);
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_integrator("euler_maruyama") == Integrator::EulerMaruyama);
  CHECK_THROWS_AS(parse_integrator("rk4"), ConfigError);
}

TEST_CASE("density bound for one mode against the series oracle") {
  for (double t : {0.01, 0.3, 2.0}) {
    const DensityBound b = density_bound_check({1.5}, t);
    CHECK(b.log_lhs == doctest::Approx(oracle::log_density_lhs_series({1.5}, t)).epsilon(1e-10));
    CHECK(b.ok);
  }
  CHECK_THROWS_AS(density_bound_check({1.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(density_bound_check({0.0}, 1.0), ConfigError);
}

TEST_CASE("log-Sobolev is sharp on exponentials") {
  // [DERIVED] For u = e^{a x} with variance v = 1/(4q): Ent = 2 a^2 v and the
  // energy side (2/q)(1/4) a^2 coincide.
  const double q = 2.0, a = 0.7, v = 1.0 / (4 * q);
  ScalarFunction u{"exp", 1, [a](const double* x) { return std::exp(a * x[0]); },
                   [a](const double* x, double* g) { g[0] = a * std::exp(a * x[0]); }};
  const LsiReport r = lsi_check(u, {q});
  CHECK(r.entropy_side == doctest::Approx(oracle::lsi_exponential_entropy(a, v)).epsilon(1e-10));
  CHECK(r.energy_side == doctest::Approx(oracle::lsi_exponential_entropy(a, v)).epsilon(1e-10));
  CHECK(r.ok);
}

TEST_CASE("hypercontractivity is an equality at t = 0") {
  ScalarFunction u{"cosh", 1, [](const double* x) { return std::cosh(x[0]); },
                   [](const double* x, double* g) { g[0] = std::sinh(x[0]); }};
  const HyperReport r = hypercontractivity_check(u, 0.0, 2.0, 1.0);
  CHECK(r.r_t == 2.0);
  CHECK(r.lhs_norm == doctest::Approx(r.rhs_norm).epsilon(1e-12));
  CHECK(r.ok);
  const HyperReport s = hypercontractivity_check(u, 0.5, 2.0, 1.0);
  CHECK(s.r_t == doctest::Approx(1.0 + std::exp(1.0)));
  CHECK(s.ok);
}

TEST_CASE("relaxation rates") {
  const auto spec = spec_n(3);
  const Vec r = relaxation_rates(spec);
  for (std::size_t n = 0; n < 3; ++n) CHECK(r[n] == doctest::Approx(spec.rate(n)));
}
}
