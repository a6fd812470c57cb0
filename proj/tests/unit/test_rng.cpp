#include <doctest.h>

#include <cmath>

#include "mflow/rng.hpp"
#include "oracles.hpp"

using namespace mflow;

TEST_SUITE("rng") {
TEST_CASE("philox known-answer vectors") {
  auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(r == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  r = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(r == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  r = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(r == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(5, 1, 9), b(5, 1, 9), c(5, 1, 10), d(5, 2, 9);
  for (int i = 0; i < 50; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
    CHECK(x != d.normal());
  }
}

TEST_CASE("uniform range and normal moments") {
  RandomStream rng(11, streams::kAudit, 0);
  std::vector<double> z(200000), z2(200000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    z[i] = rng.normal();
    z2[i] = z[i] * z[i];
  }
  const auto [m, se] = oracle::mean_se(z);
  const auto [v, sev] = oracle::mean_se(z2);
  CHECK(std::fabs(m) < 4 * se);
  CHECK(std::fabs(v - 1.0) < 4 * sev);
}
}
