#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mosdist/scoring.hpp"
#include "mosdist/simulator.hpp"
#include "mosdist/softlabel.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace mosdist;

TEST_CASE("simulate_panel basics") {
  SECTION("zero variance repeats the mean") {
    const AnnotatorPanel panel = simulate_panel(3.0, 0.0, 10, 123);
    REQUIRE(panel.ratings.size() == 10);
    for (double r : panel.ratings) REQUIRE(r == 3.0);
  }
  SECTION("ratings stay inside the scale") {
    const AnnotatorPanel panel = simulate_panel(4.8, 1.5, 5000, 7);
    for (double r : panel.ratings) {
      REQUIRE(r >= 1.0);
      REQUIRE(r <= 5.0);
    }
  }
  SECTION("sample mean lands near the true mean") {
    const std::size_t k = 100000;
    const AnnotatorPanel panel = simulate_panel(3.0, 0.5, k, 7);
    const auto [mean, unused] = oracles::two_pass_stats(panel.ratings);
    const double standard_error = 0.5 / std::sqrt(static_cast<double>(k));
    REQUIRE(std::abs(mean - 3.0) <= 3.0 * standard_error);
  }
  SECTION("identical seeds give identical panels") {
    const AnnotatorPanel a = simulate_panel(2.7, 0.6, 500, 99);
    const AnnotatorPanel b = simulate_panel(2.7, 0.6, 500, 99);
    REQUIRE(a.ratings == b.ratings);
    const AnnotatorPanel c = simulate_panel(2.7, 0.6, 500, 100);
    REQUIRE(a.ratings != c.ratings);
  }
  SECTION("parameter validation") {
    REQUIRE_THROWS_AS(simulate_panel(0.5, 0.5, 10, 1), InvalidInputError);
    REQUIRE_THROWS_AS(simulate_panel(3.0, -0.1, 10, 1), InvalidInputError);
    REQUIRE_THROWS_AS(simulate_panel(3.0, 0.5, 1, 1), InvalidInputError);
  }
}

TEST_CASE("empirical_stats matches the two-pass oracle") {
  SECTION("two-point closed form") {
    AnnotatorPanel panel;
    panel.ratings = {2.0, 4.0};
    const ScoreDistribution stats = empirical_stats(panel);
    REQUIRE(stats.mu == Approx(3.0));
    REQUIRE(stats.sigma == Approx(std::sqrt(2.0)));
  }
  SECTION("constant panel has zero sigma") {
    AnnotatorPanel panel;
    panel.ratings = {3.3, 3.3, 3.3, 3.3};
    REQUIRE(empirical_stats(panel).sigma == 0.0);
  }
  SECTION("random panel") {
    const AnnotatorPanel panel = simulate_panel(3.4, 0.7, 2000, 31);
    const ScoreDistribution stats = empirical_stats(panel);
    const auto [mean, sd] = oracles::two_pass_stats(panel.ratings);
    REQUIRE(stats.mu == Approx(mean).margin(1e-12));
    REQUIRE(stats.sigma == Approx(sd).margin(1e-12));
  }
  SECTION("needs at least two ratings") {
    AnnotatorPanel panel;
    panel.ratings = {3.0};
    REQUIRE_THROWS_AS(empirical_stats(panel), InvalidInputError);
  }
}

TEST_CASE("panel stats round-trip through the gaussian label path") {
  const LevelScheme scheme;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double mu = 1.8 + 0.13 * static_cast<double>(seed);
    const AnnotatorPanel panel = simulate_panel(mu, 0.5, 10000, seed);
    const ScoreDistribution stats = empirical_stats(panel);

    LabelOptions options;
    options.mode = SigmaMode::true_variance;
    options.sigma = stats.sigma;
    const SoftLabel label = build_label(stats.mu, options, scheme);
    REQUIRE(expected_score(label, scheme) == Approx(stats.mu).margin(1e-9));
  }
}

TEST_CASE("clamping bias is negligible away from the boundaries") {
  // With sigma = 0.3 the scale edges are five sigma away across the whole
  // [1.5, 4.5] band. At sigma = 0.8 that only holds in the interior: at
  // mu = 1.5 the analytic clamping bias is already ~0.13, so the wide-sigma
  // check stays at least two sigma from the edges.
  for (double mu : {1.5, 2.5, 3.5, 4.5}) {
    const AnnotatorPanel panel = simulate_panel(mu, 0.3, 10000, 404);
    REQUIRE(std::abs(empirical_stats(panel).mu - mu) < 0.02);
  }
  for (double mu : {2.7, 3.0, 3.3}) {
    const AnnotatorPanel panel = simulate_panel(mu, 0.8, 10000, 404);
    REQUIRE(std::abs(empirical_stats(panel).mu - mu) < 0.02);
  }
}
