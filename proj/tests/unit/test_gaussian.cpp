#include <doctest.h>

#include <cmath>

#include "mflow/errors.hpp"
#include "mflow/gaussian.hpp"
#include "oracles.hpp"

using namespace mflow;

namespace {

SpectralConfig cfg1(int N = 4) {
  SpectralConfig c;
  c.trunc = N;
  return c;
}

}  // namespace

TEST_SUITE("gaussian") {
TEST_CASE("per-mode variances and traces") {
  const auto spec = GaussianSpec::make(cfg1());
  // lambda = 2, 4, 6, 8; s^2 = lambda^{-3}; trace of lambda^{-2}.
  const Vec lam{2, 4, 6, 8};
  double tr = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    CHECK(spec.s[n] * spec.s[n] == doctest::Approx(std::pow(lam[n], -3.0)));
    CHECK(spec.rate(n) == doctest::Approx(std::pow(lam[n], 3.0) / 4));
    tr += std::pow(lam[n], -2.0);
  }
  CHECK(truncated_trace(spec) == doctest::Approx(tr));
}

TEST_CASE("sample moments in H and H_k norms") {
  const auto spec = GaussianSpec::make(cfg1());
  const SpectralBasis& b = *spec.basis;
  const std::size_t n = 40000;
  Vec h2(n), hk2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CoeffVector c = sample_g(spec, 3, i);
    h2[i] = h_norm(c) * h_norm(c);
    hk2[i] = hk_norm(c, b) * hk_norm(c, b);
  }
  double h_trace = 0.0;
  for (double s : spec.s) h_trace += s * s;
  const auto [m1, se1] = oracle::mean_se(h2);
  const auto [m2, se2] = oracle::mean_se(hk2);
  CHECK(std::fabs(m1 - h_trace) < 4 * se1);
  CHECK(std::fabs(m2 - truncated_trace(spec)) < 4 * se2);
}

TEST_CASE("draws are addressed by index") {
  const auto spec = GaussianSpec::make(cfg1());
  CHECK(sample_g(spec, 9, 17) == sample_g(spec, 9, 17));
  CHECK(sample_g(spec, 9, 17) != sample_g(spec, 9, 18));
  CHECK(sample_g(spec, 9, 17) != sample_g(spec, 9, 17, streams::kAudit));
}

TEST_CASE("weighted estimate matches the weighted mean") {
  const Vec lw{std::log(1.0), std::log(3.0), -INFINITY};
  const Vec v{2.0, 6.0, 100.0};
  const MCEstimate e = weighted_estimate(lw, v);
  CHECK(e.value == doctest::Approx(5.0));
  CHECK(e.ess == doctest::Approx(16.0 / 10.0));
  CHECK_THROWS_AS(weighted_estimate({-INFINITY, -INFINITY}, {1.0, 2.0}), AllWeightsZero);
  const MCEstimate p = mean_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(p.value == doctest::Approx(2.5));
  CHECK(p.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("integrability margin formula") {
  // (d + alpha)^{d'} / 2 - (delta/alpha + alpha1) = 4/2 - 0.5 - 0.25
  const MarginResult m = integrability_margin(1.0, 0.25, 2.0, 0.5, 1);
  CHECK(m.margin == doctest::Approx(1.25));
  CHECK(m.ok);
  CHECK_FALSE(integrability_margin(1.0, 3.0, 2.0, 0.0, 1).ok);
}

TEST_CASE("exponential moment closed form against Monte Carlo") {
  const auto spec = GaussianSpec::make(cfg1(2));
  const double delta = 0.5;
  double ref = 1.0;
  for (double s : spec.s) ref /= std::sqrt(1 - 2 * delta * s * s);
  CHECK(gaussian_exponential_moment(spec, delta) == doctest::Approx(ref));
  Vec v(50000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const CoeffVector c = sample_g(spec, 4, i);
    v[i] = std::exp(delta * h_norm(c) * h_norm(c));
  }
  const auto [m, se] = oracle::mean_se(v);
  CHECK(std::fabs(m - ref) < 4 * se);
  const double blow = 0.51 / (spec.s[0] * spec.s[0]);
  CHECK(std::isinf(gaussian_exponential_moment(spec, blow)));
}

TEST_CASE("gibbs weights split into reference and tilt") {
  const auto spec = GaussianSpec::make(cfg1());
  const SpectralBasis& b = *spec.basis;
  const PotentialSpec pot = potential_entropy();
  const CoeffVector c{0.3, -0.1, 0.05, 0.02};
  const Tilt tilt = make_tilt(pot, b, 2.0, Mode::M);
  const WeightedSample w = gibbs_weight(c, b, tilt);
  CHECK(w.log_reference == doctest::Approx(2.0 * std::log(h_norm(c))));
  CHECK(w.log_tilt == doctest::Approx(-eval_beta(pot, push_forward_M(c, b))));
  CHECK(gibbs_log_weight(c, b, pot, 2.0, Mode::M) == doctest::Approx(w.log_weight()));
  CHECK_THROWS_AS(gibbs_log_weight(CoeffVector(4, 0.0), b, pot, 0.0, Mode::P), DegenerateInput);
}

TEST_CASE("relative-entropy tilt obeys the Jensen bound in P mode") {
  const auto spec = GaussianSpec::make(cfg1());
  const SpectralBasis& b = *spec.basis;
  const PotentialSpec pot = potential_relative_entropy(PhiKind::SoftAbs, 1.0, 1);
  const Tilt tilt = make_tilt(pot, b, 0.0, Mode::P);
  const double bound = std::log(*pot.c_phi);
  for (std::size_t i = 0; i < 2000; ++i) CHECK(gibbs_weight(sample_g(spec, 1, i), b, tilt).log_tilt <= bound + 1e-12);
}

TEST_CASE("untilted expectation reduces to a plain mean") {
  const auto spec = GaussianSpec::make(cfg1());
  const Tilt tilt = make_tilt(potential_none(), *spec.basis, 0.0, Mode::M);
  SampleOptions opt;
  opt.seed = 5;
  const Observable mass = [](const CoeffVector&, const GridDensity& mu) { return mu.mass; };
  const MCEstimate e = expect(spec, tilt, mass, 20000, opt);
  double h_trace = 0.0;
  for (double s : spec.s) h_trace += s * s;
  CHECK(std::fabs(e.value - h_trace) < 4 * e.std_error);
  CHECK(e.ess == doctest::Approx(20000.0));
  CHECK_THROWS(expect(spec, tilt, mass, 50, opt));
}

TEST_CASE("estimates do not depend on worker count") {
  const auto spec = GaussianSpec::make(cfg1());
  const Tilt tilt = make_tilt(potential_entropy(), *spec.basis, 0.0, Mode::M);
  const Observable mass = [](const CoeffVector&, const GridDensity& mu) { return mu.mass; };
  SampleOptions a, z;
  a.exec = {1, 256};
  z.exec = {4, 256};
  const MCEstimate ea = expect(spec, tilt, mass, 5000, a), ez = expect(spec, tilt, mass, 5000, z);
  CHECK(ea.value == ez.value);
  CHECK(ea.std_error == ez.std_error);
}
}
