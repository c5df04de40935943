#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mosdist/level_scheme.hpp"
#include "mosdist/scoring.hpp"
#include "mosdist/softlabel.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace mosdist;

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

double recovered_mean(const std::vector<double>& probs, const LevelScheme& s) {
  double mean = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) mean += probs[i] * s.center(i);
  return mean;
}

}  // namespace

TEST_CASE("level scheme validates its invariants") {
  REQUIRE_NOTHROW(LevelScheme());
  REQUIRE(LevelScheme().size() == 5);
  REQUIRE(LevelScheme().names()[4] == "excellent");
  REQUIRE_THROWS_AS(LevelScheme({1.0}, 1.0), InvalidInputError);
  REQUIRE_THROWS_AS(LevelScheme({1.0, 2.0, 2.5}, 1.0), InvalidInputError);
  REQUIRE_THROWS_AS(LevelScheme({3.0, 2.0, 1.0}, 1.0), InvalidInputError);
  REQUIRE_THROWS_AS(LevelScheme({1.0, 2.0}, -1.0), InvalidInputError);
  REQUIRE_THROWS_AS(LevelScheme({1.0, 2.0}, 1.0, {"only-one"}), ShapeError);
  const LevelScheme wide({0.0, 2.0, 4.0, 6.0}, 2.0);
  REQUIRE(wide.center_sum() == Approx(12.0));
}

TEST_CASE("normalize_score is the affine map onto [1, 5]") {
  REQUIRE(normalize_score(50.0, 0.0, 100.0) == Approx(3.0));
  REQUIRE(normalize_score(0.0, 0.0, 100.0) == Approx(1.0));
  REQUIRE(normalize_score(100.0, 0.0, 100.0) == Approx(5.0));
  REQUIRE(normalize_score(73.0, 0.0, 100.0) == Approx(3.92));

  REQUIRE_THROWS_AS(normalize_score(1.0, 5.0, 5.0), InvalidRangeError);
  REQUIRE_THROWS_AS(normalize_score(1.0, 10.0, 5.0), InvalidRangeError);
  REQUIRE_THROWS_AS(normalize_score(101.0, 0.0, 100.0), OutOfRangeError);
  REQUIRE_THROWS_AS(normalize_score(-1.0, 0.0, 100.0), OutOfRangeError);

  // Strictly monotone on a grid.
  double prev = normalize_score(0.0, 0.0, 100.0);
  for (int raw = 1; raw <= 100; ++raw) {
    const double cur = normalize_score(raw, 0.0, 100.0);
    REQUIRE(cur > prev);
    prev = cur;
  }
}

TEST_CASE("pseudo_sigma is scale invariant in normalized units") {
  REQUIRE(pseudo_sigma(0.0, 100.0) == Approx(0.8).epsilon(1e-12));
  REQUIRE(pseudo_sigma(1.0, 5.0) == Approx(0.8).epsilon(1e-12));
  REQUIRE(pseudo_sigma(0.0, 10.0) == Approx(0.8).epsilon(1e-12));
  // Raw-unit value behind the default ratio: 0.2 * (max - min).
  REQUIRE(normalize_sigma(20.0, 0.0, 100.0) == Approx(0.8));
  REQUIRE(pseudo_sigma(0.0, 100.0, 0.15) == Approx(0.6).epsilon(1e-12));
  REQUIRE_THROWS_AS(pseudo_sigma(5.0, 5.0), InvalidRangeError);
}

TEST_CASE("discretize_gaussian matches frozen quadrature values") {
  const LevelScheme scheme;
  const RawLabel raw = discretize_gaussian({3.0, 0.5}, scheme);
  // Frozen from the Simpson oracle (and the CDF identity) for mu=3, sigma=0.5.
  REQUIRE(raw.probs[2] == Approx(0.6826894921370859).margin(1e-5));
  REQUIRE(raw.probs[1] == Approx(0.1573053559982713).margin(1e-5));
  REQUIRE(raw.probs[3] == Approx(0.1573053559982713).margin(1e-5));
  REQUIRE(raw.probs[0] == Approx(0.0013496113800582).margin(1e-5));
  REQUIRE(raw.probs[4] == Approx(0.0013496113800582).margin(1e-5));
}

TEST_CASE("discretize_gaussian agrees with numerical quadrature") {
  const LevelScheme scheme;
  for (double mu : {1.4, 2.3, 3.0, 3.7, 4.2, 4.6}) {
    for (double sigma : {0.2, 0.5, 0.8, 1.2}) {
      const RawLabel raw = discretize_gaussian({mu, sigma}, scheme);
      for (std::size_t i = 0; i < scheme.size(); ++i) {
        const double lo = scheme.center(i) - 0.5;
        const double hi = scheme.center(i) + 0.5;
        const double reference =
            oracles::gauss_bin_quadrature(mu, sigma, lo, hi);
        REQUIRE(raw.probs[i] == Approx(reference).margin(1e-8));
      }
    }
  }
}

TEST_CASE("discretize_gaussian is symmetric about the middle center") {
  const LevelScheme scheme;
  for (double sigma : {0.1, 0.4, 0.9, 1.5, 3.0}) {
    const RawLabel raw = discretize_gaussian({3.0, sigma}, scheme);
    REQUIRE(raw.probs[0] == Approx(raw.probs[4]).margin(1e-15));
    REQUIRE(raw.probs[1] == Approx(raw.probs[3]).margin(1e-15));
  }
}

TEST_CASE("discretize_gaussian rejects a zero sigma") {
  REQUIRE_THROWS_AS(discretize_gaussian({3.0, 0.0}, LevelScheme()),
                    DegenerateDistributionError);
}

TEST_CASE("post_adjust rescales only in the symmetric case") {
  const LevelScheme scheme;
  const RawLabel raw = discretize_gaussian({3.0, 0.5}, scheme);
  const auto [label, params] = post_adjust(raw, 3.0, scheme);
  double raw_sum = 0.0;
  for (double p : raw.probs) raw_sum += p;
  REQUIRE(params.beta == 0.0);
  REQUIRE(params.alpha == Approx(1.0 / raw_sum).epsilon(1e-12));
  REQUIRE(label.provenance == LabelProvenance::gaussian);
  double sum = 0.0;
  for (double p : label.probs) sum += p;
  REQUIRE(sum == Approx(1.0).margin(1e-12));
  REQUIRE(recovered_mean(label.probs, scheme) == Approx(3.0).margin(1e-9));
}

TEST_CASE("post_adjust satisfies both constraints away from symmetry") {
  const LevelScheme scheme;
  const double mu = 3.7;
  const RawLabel raw = discretize_gaussian({mu, 0.5}, scheme);
  const auto [label, params] = post_adjust(raw, mu, scheme);
  REQUIRE(label.provenance == LabelProvenance::gaussian);

  double sum = 0.0;
  for (double p : label.probs) {
    REQUIRE(p >= 0.0);
    sum += p;
  }
  REQUIRE(sum == Approx(1.0).margin(1e-9));
  REQUIRE(recovered_mean(label.probs, scheme) == Approx(mu).margin(1e-9));

  // Cross-check alpha/beta against a generic 2x2 solve in long double.
  long double s = 0, m = 0;
  for (std::size_t i = 0; i < raw.probs.size(); ++i) {
    s += raw.probs[i];
    m += static_cast<long double>(raw.probs[i]) * scheme.center(i);
  }
  const long double c = 15.0L, n = 5.0L;
  const long double det = s * c - n * m;
  const long double alpha_ref = (c - n * mu) / det;
  const long double beta_ref = (mu * s - m) / det;
  REQUIRE(params.alpha == Approx(static_cast<double>(alpha_ref)).epsilon(1e-12));
  REQUIRE(params.beta == Approx(static_cast<double>(beta_ref)).epsilon(1e-12));
}

TEST_CASE("post_adjust preserves the mean even when it must fall back") {
  // Far from the middle the transform needs a negative offset, which pushes
  // empty bins below zero; the fallback keeps both constraints via
  // interpolation instead.
  const LevelScheme scheme;
  const double mu = 4.2;
  const auto [label, params] =
      post_adjust(discretize_gaussian({mu, 0.8}, scheme), mu, scheme);
  REQUIRE(label.provenance == LabelProvenance::degenerate_fallback);
  double sum = 0.0;
  for (double p : label.probs) sum += p;
  REQUIRE(sum == Approx(1.0).margin(1e-12));
  REQUIRE(recovered_mean(label.probs, scheme) == Approx(mu).margin(1e-12));
}

TEST_CASE("post_adjust falls back to interpolation on negative entries") {
  const LevelScheme scheme;
  const double mu = 1.1;
  const RawLabel raw = discretize_gaussian({mu, 0.8}, scheme);

  // The raw solve must actually go negative for this case to be meaningful.
  double s = 0, m = 0;
  for (std::size_t i = 0; i < raw.probs.size(); ++i) {
    s += raw.probs[i];
    m += raw.probs[i] * scheme.center(i);
  }
  const double det = s * 15.0 - 5.0 * m;
  const double alpha = (15.0 - 5.0 * mu) / det;
  const double beta = (mu * s - m) / det;
  bool any_negative = false;
  for (double p : raw.probs) {
    if (alpha * p + beta < 0.0) any_negative = true;
  }
  REQUIRE(any_negative);

  const auto [label, params] = post_adjust(raw, mu, scheme);
  REQUIRE(label.provenance == LabelProvenance::degenerate_fallback);
  const SoftLabel interp = linear_interp_label(mu, scheme);
  REQUIRE(linf(label.probs, interp.probs) == 0.0);
}

TEST_CASE("post_adjust reports an unreachable singular mean") {
  const LevelScheme scheme;
  // Raw mean is exactly 3 (center average), so the system is singular and a
  // pure rescale can never reach mu = 3.2.
  RawLabel crafted;
  crafted.probs = {0.2, 0.1, 0.0, 0.1, 0.2};
  REQUIRE_THROWS_AS(post_adjust(crafted, 3.2, scheme),
                    InconsistentAdjustmentError);
  REQUIRE_NOTHROW(post_adjust(crafted, 3.0, scheme));
}

TEST_CASE("post_adjust validates its inputs") {
  const LevelScheme scheme;
  RawLabel raw;
  raw.probs = {0.2, 0.2, 0.2, 0.2};
  REQUIRE_THROWS_AS(post_adjust(raw, 3.0, scheme), ShapeError);
  raw.probs = {0.2, 0.2, 0.2, 0.2, -0.1};
  REQUIRE_THROWS_AS(post_adjust(raw, 3.0, scheme), InvalidInputError);
  raw.probs = {0.9, 0.9, 0.9, 0.9, 0.9};
  REQUIRE_THROWS_AS(post_adjust(raw, 3.0, scheme), InvalidInputError);
  raw.probs = {0.2, 0.2, 0.2, 0.2, 0.2};
  REQUIRE_THROWS_AS(post_adjust(raw, 5.8, scheme), OutOfRangeError);
}

TEST_CASE("linear_interp_label puts mass on the two bracketing levels") {
  const LevelScheme scheme;
  SECTION("between centers") {
    const SoftLabel label = linear_interp_label(3.5, scheme);
    REQUIRE(label.probs == std::vector<double>{0.0, 0.0, 0.5, 0.5, 0.0});
    REQUIRE(label.provenance == LabelProvenance::interp);
  }
  SECTION("exactly at a center") {
    const SoftLabel label = linear_interp_label(4.0, scheme);
    REQUIRE(label.probs == std::vector<double>{0.0, 0.0, 0.0, 1.0, 0.0});
  }
  SECTION("asymmetric split") {
    const SoftLabel label = linear_interp_label(1.25, scheme);
    REQUIRE(label.probs[0] == Approx(0.75));
    REQUIRE(label.probs[1] == Approx(0.25));
    REQUIRE(label.probs[2] == 0.0);
  }
  SECTION("clamped outside the centers") {
    REQUIRE(linear_interp_label(0.3, scheme).probs.front() == 1.0);
    REQUIRE(linear_interp_label(5.9, scheme).probs.back() == 1.0);
  }
  SECTION("non-finite input") {
    REQUIRE_THROWS_AS(linear_interp_label(std::nan(""), scheme),
                      InvalidInputError);
  }
}

TEST_CASE("interp labels recover their mean exactly with two nonzeros") {
  const LevelScheme scheme;
  std::mt19937_64 rng(20240907);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu =
        1.0 + 4.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const SoftLabel label = linear_interp_label(mu, scheme);
    int nonzero = 0;
    for (double p : label.probs) {
      if (p != 0.0) ++nonzero;
    }
    REQUIRE(nonzero <= 2);
    REQUIRE(recovered_mean(label.probs, scheme) == Approx(mu).margin(1e-12));
  }
}

TEST_CASE("build_label dispatches per mode") {
  const LevelScheme scheme;
  SECTION("interp delegates to interpolation") {
    LabelOptions options;
    options.mode = SigmaMode::interp;
    REQUIRE(build_label(3.5, options, scheme).probs ==
            std::vector<double>{0.0, 0.0, 0.5, 0.5, 0.0});
  }
  SECTION("pseudo preserves the mean exactly") {
    LabelOptions options;
    options.mode = SigmaMode::pseudo;
    // Inside the window where the adjusted entries stay non-negative.
    const SoftLabel inside = build_label(3.2, options, scheme);
    REQUIRE(inside.provenance == LabelProvenance::gaussian);
    REQUIRE(recovered_mean(inside.probs, scheme) == Approx(3.2).margin(1e-9));
    // Beyond it the fallback carries the mean instead (for sigma = 0.8 the
    // window is roughly mu in [2.5, 3.5]).
    const SoftLabel outside = build_label(4.2, options, scheme);
    REQUIRE(outside.provenance == LabelProvenance::degenerate_fallback);
    REQUIRE(recovered_mean(outside.probs, scheme) == Approx(4.2).margin(1e-9));
  }
  SECTION("tiny true variance degrades into interpolation") {
    LabelOptions options;
    options.mode = SigmaMode::true_variance;
    options.sigma = 1e-4;
    const SoftLabel gauss = build_label(3.0, options, scheme);
    const SoftLabel interp = linear_interp_label(3.0, scheme);
    REQUIRE(linf(gauss.probs, interp.probs) <= 1e-3);
  }
  SECTION("zero true variance propagates the degenerate error") {
    LabelOptions options;
    options.mode = SigmaMode::true_variance;
    options.sigma = 0.0;
    REQUIRE_THROWS_AS(build_label(3.0, options, scheme),
                      DegenerateDistributionError);
  }
}

TEST_CASE("gaussian labels satisfy sum and mean constraints across the grid") {
  const LevelScheme scheme;
  for (double mu = 1.3; mu <= 4.7 + 1e-12; mu += 0.1) {
    for (double sigma : {0.2, 0.4, 0.8, 1.2, 1.5}) {
      const auto [label, params] =
          post_adjust(discretize_gaussian({mu, sigma}, scheme), mu, scheme);
      double sum = 0.0;
      for (double p : label.probs) {
        REQUIRE(p >= 0.0);
        sum += p;
      }
      REQUIRE(sum == Approx(1.0).margin(1e-9));
      REQUIRE(recovered_mean(label.probs, scheme) == Approx(mu).margin(1e-9));
    }
  }
}

TEST_CASE("recovered mean is monotone in mu for fixed sigma") {
  const LevelScheme scheme;
  for (double sigma : {0.3, 0.8, 1.5}) {
    double prev = -1e9;
    for (double mu = 1.0; mu <= 5.0 + 1e-12; mu += 0.05) {
      LabelOptions options;
      options.mode = SigmaMode::true_variance;
      options.sigma = sigma;
      const SoftLabel label = build_label(mu, options, scheme);
      const double mean = recovered_mean(label.probs, scheme);
      REQUIRE(mean >= prev - 1e-12);
      prev = mean;
    }
  }
}

TEST_CASE("post_adjust generalizes beyond five levels") {
  const LevelScheme scheme({1, 2, 3, 4, 5, 6, 7}, 1.0);
  const double mu = 5.4;
  const auto [label, params] =
      post_adjust(discretize_gaussian({mu, 0.9}, scheme), mu, scheme);
  double sum = 0.0;
  for (double p : label.probs) sum += p;
  REQUIRE(sum == Approx(1.0).margin(1e-9));
  REQUIRE(recovered_mean(label.probs, scheme) == Approx(mu).margin(1e-9));
}
