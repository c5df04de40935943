#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mosdist/errors.hpp"
#include "mosdist/softlabel.hpp"

namespace mosdist {

/// Synthetic annotator panel: individual ratings drawn from a declared
/// Gaussian, plus the parameters that generated them.
struct AnnotatorPanel {
  std::vector<double> ratings;
  double true_mu = 0.0;
  double true_sigma = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Deterministic standard-normal stream: explicit Box-Muller over uniforms
/// built from the top 53 bits of mt19937_64 output. std::normal_distribution
/// is implementation-defined, so it cannot back a bit-reproducibility
/// contract; this can.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));  // u1 < 1 always
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

/// Draw k independent ratings from N(mu, sigma^2), clamped to [1, 5].
/// Deterministic per seed.
inline AnnotatorPanel simulate_panel(double mu, double sigma, std::size_t k,
                                     std::uint64_t seed) {
  if (!std::isfinite(mu) || mu < 1.0 || mu > 5.0) {
    throw InvalidInputError("simulate_panel: mu must lie in [1, 5]");
  }
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw InvalidInputError("simulate_panel: sigma must be finite and >= 0");
  }
  if (k < 2) {
    throw InvalidInputError("simulate_panel: need at least two annotators");
  }
  AnnotatorPanel panel;
  panel.true_mu = mu;
  panel.true_sigma = sigma;
  panel.seed = seed;
  panel.ratings.resize(k);
  detail::GaussianStream stream(seed);
  for (double& rating : panel.ratings) {
    rating = std::clamp(mu + sigma * stream.next(), 1.0, 5.0);
  }
  return panel;
}

/// Sample mean and sample standard deviation (K-1 denominator) of a panel,
/// accumulated online (Welford) so a single pass suffices.
inline ScoreDistribution empirical_stats(const AnnotatorPanel& panel) {
  if (panel.ratings.size() < 2) {
    throw InvalidInputError("empirical_stats: need at least two ratings");
  }
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (double rating : panel.ratings) {
    ++count;
    const double delta = rating - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (rating - mean);
  }
  const double variance = m2 / static_cast<double>(count - 1);
  return ScoreDistribution{mean, std::sqrt(variance)};
}

}  // namespace mosdist
