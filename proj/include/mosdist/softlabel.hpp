#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mosdist/errors.hpp"
#include "mosdist/level_scheme.hpp"

namespace mosdist {

/// Gaussian model of one item's quality score: mean opinion score and
/// standard deviation, both in normalized score units.
struct ScoreDistribution {
  double mu = 0.0;
  double sigma = 0.0;
};

/// How a soft label was produced.
enum class LabelProvenance {
  gaussian,             // discretized Gaussian + post-adjustment
  interp,               // two-level linear interpolation
  degenerate_fallback,  // post-adjustment went negative, fell back to interp
};

inline const char* to_string(LabelProvenance p) {
  switch (p) {
    case LabelProvenance::gaussian:
      return "gaussian";
    case LabelProvenance::interp:
      return "interp";
    case LabelProvenance::degenerate_fallback:
      return "degenerate-fallback";
  }
  return "unknown";
}

inline LabelProvenance provenance_from_string(const std::string& s) {
  if (s == "gaussian") return LabelProvenance::gaussian;
  if (s == "interp") return LabelProvenance::interp;
  if (s == "degenerate-fallback") return LabelProvenance::degenerate_fallback;
  throw InvalidInputError("unknown provenance: " + s);
}

/// Per-level bin masses before truncation correction. Entries are
/// non-negative but need not sum to 1 (tail mass outside the outer bin
/// edges is simply missing).
struct RawLabel {
  std::vector<double> probs;
};

/// A proper distribution over the levels, usable as a training target.
struct SoftLabel {
  std::vector<double> probs;
  LabelProvenance provenance = LabelProvenance::interp;
};

/// The linear transform p_i = alpha * p_i^raw + beta solved from the
/// sum and mean constraints.
struct AdjustmentParams {
  double alpha = 1.0;
  double beta = 0.0;
};

/// Standard normal CDF via the complementary error function.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Affine map of a raw score onto the normalized scale (default [1, 5]).
/// range_min maps to out_lo, range_max to out_hi.
inline double normalize_score(double raw, double range_min, double range_max,
                              double out_lo = 1.0, double out_hi = 5.0) {
  if (!std::isfinite(raw) || !std::isfinite(range_min) ||
      !std::isfinite(range_max)) {
    throw InvalidInputError("normalize_score: non-finite input");
  }
  if (!(range_max > range_min)) {
    throw InvalidRangeError("normalize_score: range_max must exceed range_min");
  }
  if (raw < range_min || raw > range_max) {
    throw OutOfRangeError("normalize_score: raw score outside declared range");
  }
  return out_lo + (out_hi - out_lo) * (raw - range_min) / (range_max - range_min);
}

/// Rescale a raw-units standard deviation onto the normalized scale.
inline double normalize_sigma(double raw_sigma, double range_min,
                              double range_max, double out_lo = 1.0,
                              double out_hi = 5.0) {
  if (!std::isfinite(raw_sigma) || raw_sigma < 0.0) {
    throw InvalidInputError("normalize_sigma: sigma must be finite and >= 0");
  }
  if (!(range_max > range_min)) {
    throw InvalidRangeError("normalize_sigma: range_max must exceed range_min");
  }
  return raw_sigma * (out_hi - out_lo) / (range_max - range_min);
}

/// Pseudo standard deviation for datasets that publish only mean scores:
/// ratio * (range_max - range_min) in raw units, returned already rescaled
/// to normalized units. With the default ratio 0.2 and the [1, 5] scale
/// this is 0.8 regardless of the raw range.
inline double pseudo_sigma(double range_min, double range_max,
                           double ratio = 0.2, double out_lo = 1.0,
                           double out_hi = 5.0) {
  if (!(range_max > range_min)) {
    throw InvalidRangeError("pseudo_sigma: range_max must exceed range_min");
  }
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw InvalidInputError("pseudo_sigma: ratio must be positive");
  }
  const double raw = ratio * (range_max - range_min);
  return normalize_sigma(raw, range_min, range_max, out_lo, out_hi);
}

/// Bin masses of a Gaussian score distribution: for each level,
/// the integral of the density over [c_i - d/2, c_i + d/2], evaluated in
/// closed form as a difference of two CDF values. No sampling anywhere.
inline RawLabel discretize_gaussian(const ScoreDistribution& dist,
                                    const LevelScheme& scheme) {
  if (!std::isfinite(dist.mu)) {
    throw InvalidInputError("discretize_gaussian: mu must be finite");
  }
  if (!(dist.sigma > 0.0) || !std::isfinite(dist.sigma)) {
    throw DegenerateDistributionError(
        "discretize_gaussian: sigma must be > 0 (use linear_interp_label for "
        "point masses)");
  }
  const double half = 0.5 * scheme.width();
  RawLabel raw;
  raw.probs.resize(scheme.size());
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const double lo = (scheme.center(i) - half - dist.mu) / dist.sigma;
    const double hi = (scheme.center(i) + half - dist.mu) / dist.sigma;
    raw.probs[i] = std::max(0.0, normal_cdf(hi) - normal_cdf(lo));
  }
  return raw;
}

/// Two-level interpolation label: all mass on the two centers bracketing mu,
/// weighted by adjacency. mu exactly at a center gets a point mass there;
/// mu beyond the outer centers is clamped to the boundary level.
inline SoftLabel linear_interp_label(double mu, const LevelScheme& scheme) {
  if (!std::isfinite(mu)) {
    throw InvalidInputError("linear_interp_label: mu must be finite");
  }
  SoftLabel label;
  label.provenance = LabelProvenance::interp;
  label.probs.assign(scheme.size(), 0.0);
  if (mu <= scheme.min_center()) {
    label.probs.front() = 1.0;
    return label;
  }
  if (mu >= scheme.max_center()) {
    label.probs.back() = 1.0;
    return label;
  }
  // Find j with c_j < mu <= c_{j+1}.
  std::size_t j = 0;
  while (j + 2 < scheme.size() && mu > scheme.center(j + 1)) {
    ++j;
  }
  const double d = scheme.width();
  label.probs[j] = (scheme.center(j + 1) - mu) / d;
  label.probs[j + 1] = (mu - scheme.center(j)) / d;
  return label;
}

/// Truncation correction. Solves the 2x2 system
///
///   alpha * S + n * beta = 1        (unit sum)
///   alpha * M + C * beta = mu       (mean recovery)
///
/// with S = sum p_i^raw, M = sum p_i^raw c_i, C = sum c_i, and returns
/// p_i = alpha * p_i^raw + beta. When the system is singular (the raw
/// discrete mean already equals the average of the centers) the mean
/// constraint is linearly dependent on the sum constraint, so we take
/// beta = 0, alpha = 1/S and verify the mean still lands on mu. When any
/// adjusted entry is negative the label falls back to linear interpolation
/// and the provenance records that.
inline std::pair<SoftLabel, AdjustmentParams> post_adjust(
    const RawLabel& raw, double mu, const LevelScheme& scheme) {
  const std::size_t n = scheme.size();
  if (raw.probs.size() != n) {
    throw ShapeError("post_adjust: raw label size does not match scheme");
  }
  if (!std::isfinite(mu)) {
    throw InvalidInputError("post_adjust: mu must be finite");
  }
  const double half = 0.5 * scheme.width();
  if (mu < scheme.min_center() - half || mu > scheme.max_center() + half) {
    throw OutOfRangeError("post_adjust: mu outside the level span");
  }
  double sum = 0.0;
  double mean_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = raw.probs[i];
    if (!(p >= 0.0) || p > 1.0 || !std::isfinite(p)) {
      throw InvalidInputError("post_adjust: raw probabilities must be in [0,1]");
    }
    sum += p;
    mean_mass += p * scheme.center(i);
  }
  if (sum > 1.0 + 1e-12) {
    throw InvalidInputError("post_adjust: raw probabilities sum above 1");
  }
  if (!(sum > 0.0)) {
    throw InvalidInputError("post_adjust: raw probabilities sum to zero");
  }

  const double count = static_cast<double>(n);
  const double center_sum = scheme.center_sum();
  const double det = sum * center_sum - count * mean_mass;
  const double det_scale =
      std::max({1.0, std::abs(sum * center_sum), std::abs(count * mean_mass)});

  AdjustmentParams params;
  if (std::abs(det) <= 1e-12 * det_scale) {
    // Singular: raw discrete mean equals the center average. Rescale only.
    params.alpha = 1.0 / sum;
    params.beta = 0.0;
    if (std::abs(mean_mass / sum - mu) > 1e-9) {
      throw InconsistentAdjustmentError(
          "post_adjust: singular system cannot reach the target mean");
    }
  } else {
    params.alpha = (center_sum - count * mu) / det;
    params.beta = (mu * sum - mean_mass) / det;
  }

  SoftLabel label;
  label.provenance = LabelProvenance::gaussian;
  label.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = params.alpha * raw.probs[i] + params.beta;
    if (p < 0.0) {
      SoftLabel fallback = linear_interp_label(mu, scheme);
      fallback.provenance = LabelProvenance::degenerate_fallback;
      return {std::move(fallback), params};
    }
    label.probs[i] = p;
  }
  return {std::move(label), params};
}

/// Which sigma the Gaussian path should use, if any.
enum class SigmaMode {
  true_variance,  // sigma supplied per item
  pseudo,         // fixed pseudo sigma from the score-range ratio
  interp,         // skip the Gaussian entirely
};

inline const char* to_string(SigmaMode m) {
  switch (m) {
    case SigmaMode::true_variance:
      return "true-variance";
    case SigmaMode::pseudo:
      return "pseudo";
    case SigmaMode::interp:
      return "interp";
  }
  return "unknown";
}

inline SigmaMode sigma_mode_from_string(const std::string& s) {
  if (s == "true-variance") return SigmaMode::true_variance;
  if (s == "pseudo") return SigmaMode::pseudo;
  if (s == "interp") return SigmaMode::interp;
  throw InvalidInputError("unknown label mode: " + s);
}

struct LabelOptions {
  SigmaMode mode = SigmaMode::pseudo;
  double sigma = 0.0;         // used by true_variance
  double pseudo_ratio = 0.2;  // used by pseudo
};

/// One-stop label construction for a normalized mean score.
inline SoftLabel build_label(double mu, const LabelOptions& options,
                             const LevelScheme& scheme = LevelScheme()) {
  switch (options.mode) {
    case SigmaMode::interp:
      return linear_interp_label(mu, scheme);
    case SigmaMode::pseudo: {
      const double span = scheme.max_center() - scheme.min_center();
      const ScoreDistribution dist{mu, options.pseudo_ratio * span};
      return post_adjust(discretize_gaussian(dist, scheme), mu, scheme).first;
    }
    case SigmaMode::true_variance: {
      const ScoreDistribution dist{mu, options.sigma};
      return post_adjust(discretize_gaussian(dist, scheme), mu, scheme).first;
    }
  }
  throw InvalidInputError("build_label: unknown sigma mode");
}

}  // namespace mosdist
