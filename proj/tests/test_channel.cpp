#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rramcap/channel.hpp"

using namespace rramcap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("build_level_scheme places means with half-spacing margins", "[channel]") {
  SECTION("[0, 100], L = 4") {
    auto s = build_level_scheme({0.0, 100.0}, 4);
    CHECK(s.delta_g == 25.0);
    CHECK(s.means == std::vector<double>{12.5, 37.5, 62.5, 87.5});
  }
  SECTION("single level sits at the range centre") {
    auto s = build_level_scheme({1.0, 250.0}, 1);
    CHECK(s.delta_g == 249.0);
    REQUIRE(s.means.size() == 1);
    CHECK(s.means[0] == 125.5);
  }
  SECTION("[10, 200], L = 19") {
    auto s = build_level_scheme({10.0, 200.0}, 19);
    CHECK(s.delta_g == 10.0);
    REQUIRE(s.means.size() == 19);
    for (std::size_t i = 0; i < 19; ++i) CHECK_THAT(s.means[i], WithinAbs(15.0 + 10.0 * i, 1e-12));
    CHECK_THAT(s.means.back(), WithinAbs(195.0, 1e-12));
  }
  SECTION("pure and strictly increasing") {
    auto x = build_level_scheme({1.0, 250.0}, 37);
    auto y = build_level_scheme({1.0, 250.0}, 37);
    CHECK(x.means == y.means);
    for (std::size_t i = 1; i < x.means.size(); ++i) CHECK(x.means[i] > x.means[i - 1]);
    CHECK_THAT(x.means.front(), WithinAbs(1.0 + x.delta_g / 2, 1e-12));
    CHECK_THAT(x.means.back(), WithinAbs(250.0 - x.delta_g / 2, 1e-12));
  }
}

TEST_CASE("build_level_scheme rejects bad input", "[channel]") {
  CHECK_THROWS_AS(build_level_scheme({0.0, 10.0}, 0), ValidationError);
  CHECK_THROWS_AS(build_level_scheme({10.0, 10.0}, 2), ValidationError);
  CHECK_THROWS_AS(build_level_scheme({20.0, 10.0}, 2), ValidationError);
  CHECK_THROWS_AS(build_level_scheme({-1.0, 10.0}, 2), ValidationError);
}

TEST_CASE("interval_mass keeps tail accuracy", "[channel][normal]") {
  // Reference values from 40-digit arithmetic.
  CHECK_THAT(normal::interval_mass(8.0, 9.0), WithinRel(6.21983198586583028e-16, 1e-12));
  CHECK_THAT(normal::interval_mass(-9.0, -8.0), WithinRel(6.21983198586583028e-16, 1e-12));
  CHECK_THAT(normal::interval_mass(-0.5, 1.5), WithinRel(0.624655260005155038, 1e-14));
}

TEST_CASE("conditional_density", "[channel]") {
  SECTION("zero outside the range") {
    Channel ch(build_level_scheme({0.0, 10.0}, 2), {1.0, 1.0});
    CHECK(conditional_density(ch, 0, -0.001) == 0.0);
    CHECK(conditional_density(ch, 1, 10.001) == 0.0);
  }
  SECTION("untruncated peak when sigma is tiny") {
    auto scheme = build_level_scheme({0.0, 90.0}, 3);
    const double sigma = scheme.delta_g / 100.0;
    Channel ch(scheme, std::vector<double>(3, sigma));
    const double peak = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    CHECK_THAT(conditional_density(ch, 1, scheme.means[1]), WithinRel(peak, 1e-6));
  }
  SECTION("brute-force normalizer on [0, 10], mean 2.5, sigma 5") {
    LevelScheme scheme{{0.0, 10.0}, 1, 10.0, {2.5}};
    Channel ch(scheme, {5.0});
    const double brute = oracle::gaussian(2.5, 2.5, 5.0) / oracle::riemann_mass(2.5, 5.0, 0.0, 10.0, 2000000);
    CHECK_THAT(conditional_density(ch, 0, 2.5), WithinRel(brute, 1e-6));
    CHECK_THAT(conditional_density(ch, 0, 2.5), WithinRel(0.127731984646424129, 1e-12));
  }
  SECTION("level index out of bounds") {
    Channel ch(build_level_scheme({0.0, 10.0}, 2), {1.0, 1.0});
    CHECK_THROWS_AS(conditional_density(ch, 2, 5.0), IndexError);
  }
}

TEST_CASE("conditional densities integrate to one", "[channel][property]") {
  std::mt19937_64 rng(20241016);
  std::uniform_int_distribution<std::size_t> pick_l(1, 12);
  std::uniform_real_distribution<double> pick_lo(0.0, 50.0), pick_span(5.0, 250.0), pick_ratio(0.05, 2.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double lo = pick_lo(rng);
    const double hi = lo + pick_span(rng);
    const std::size_t L = pick_l(rng);
    auto scheme = build_level_scheme({lo, hi}, L);
    std::vector<double> sig(L);
    for (double& s : sig) s = scheme.delta_g * pick_ratio(rng);
    Channel ch(scheme, sig);
    for (std::size_t i = 0; i < L; ++i) {
      const double total = oracle::simpson([&](double g) { return conditional_density(ch, i, g); },
                                           lo, hi, 400000);
      CHECK_THAT(total, WithinAbs(1.0, 1e-9));
    }
  }
}

TEST_CASE("conditional density is symmetric about a centred mean", "[channel][property]") {
  Channel ch(build_level_scheme({0.0, 30.0}, 3), {4.0, 7.0, 4.0});
  const double mid = 15.0;
  for (double d : {0.5, 3.0, 9.0, 14.9})
    CHECK_THAT(conditional_density(ch, 1, mid + d), WithinRel(conditional_density(ch, 1, mid - d), 1e-14));
}

TEST_CASE("densities scale as 1/k under conductance rescaling", "[channel][property]") {
  const std::vector<double> sig{1.5, 3.0, 0.7, 2.2};
  Channel base(build_level_scheme({2.0, 42.0}, 4), sig);
  for (double k : {0.1, 10.0, 1000.0}) {
    std::vector<double> scaled_sig;
    for (double s : sig) scaled_sig.push_back(s * k);
    Channel scaled(build_level_scheme({2.0 * k, 42.0 * k}, 4), scaled_sig);
    for (std::size_t i = 0; i < 4; ++i)
      for (double g : {2.0, 7.3, 21.0, 33.3, 42.0})
        CHECK_THAT(conditional_density(scaled, i, g * k) * k,
                   WithinRel(conditional_density(base, i, g), 1e-12));
  }
}

TEST_CASE("resolve_noise", "[channel][noise]") {
  SECTION("constant replicates") {
    CHECK(resolve_noise(ConstantNoise{3.0}, 5) == std::vector<double>(5, 3.0));
  }
  SECTION("per-level length must match") {
    CHECK_THROWS_AS(resolve_noise(PerLevelNoise{{3.0, 6.0}}, 3), ValidationError);
    CHECK(resolve_noise(PerLevelNoise{{3.0, 6.0, 9.0}}, 3) == std::vector<double>{3.0, 6.0, 9.0});
  }
  SECTION("random draw is seeded, deterministic and within support") {
    RandomDraw draw{UniformDraw{3.0, 20.0}, 0.1};
    auto x = resolve_noise(draw, 8, 42);
    auto y = resolve_noise(draw, 8, 42);
    CHECK(x == y);
    REQUIRE(x.size() == 8);
    for (double s : x) {
      CHECK(s >= 3.0);
      CHECK(s <= 20.0);
    }
    CHECK(resolve_noise(draw, 8, 43) != x);
  }
  SECTION("random draw without a seed is an error") {
    CHECK_THROWS_AS(resolve_noise(RandomDraw{UniformDraw{3.0, 20.0}, 0.1}, 4), ValidationError);
  }
  SECTION("normal draws below clip_min are redrawn, not clipped") {
    RandomDraw draw{NormalDraw{1.0, 2.0}, 0.5};
    auto s = resolve_noise(draw, 2000, 7);
    std::size_t at_clip = 0;
    for (double v : s) {
      CHECK(v >= 0.5);
      at_clip += v == 0.5;
    }
    CHECK(at_clip == 0);
  }
  SECTION("degenerate uniform") {
    CHECK(resolve_noise(RandomDraw{UniformDraw{5.0, 5.0}, 0.1}, 4, 1) == std::vector<double>(4, 5.0));
  }
  SECTION("zero or negative sigma is rejected") {
    CHECK_THROWS_AS(resolve_noise(ConstantNoise{0.0}, 3), ValidationError);
    CHECK_THROWS_AS(resolve_noise(PerLevelNoise{{1.0, -1.0}}, 2), ValidationError);
    CHECK_THROWS_AS(resolve_noise(RandomDraw{UniformDraw{3.0, 20.0}, 0.0}, 2, 1), ValidationError);
    CHECK_THROWS_AS(resolve_noise(RandomDraw{UniformDraw{0.01, 0.05}, 0.1}, 2, 1), ValidationError);
    CHECK_THROWS_AS(resolve_noise(RandomDraw{NormalDraw{5.0, 0.0}, 0.1}, 2, 1), ValidationError);
  }
}

TEST_CASE("Channel validates sigma and prior", "[channel]") {
  auto scheme = build_level_scheme({0.0, 30.0}, 3);
  CHECK_THROWS_AS(Channel(scheme, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(Channel(scheme, {1.0, 0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(Channel(scheme, {1.0, 1.0, 1.0}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(Channel(scheme, {1.0, 1.0, 1.0}, {0.5, 0.6, -0.1}), ValidationError);
  CHECK_THROWS_AS(Channel(scheme, {1.0, 1.0, 1.0}, {0.5, 0.3, 0.3}), ValidationError);

  Channel uniform(scheme, {1.0, 1.0, 1.0});
  for (double p : uniform.prior()) CHECK(p == 1.0 / 3.0);
  Channel custom(scheme, {1.0, 1.0, 1.0}, {1.0, 0.0, 0.0});
  CHECK(custom.prior()[0] == 1.0);
}
