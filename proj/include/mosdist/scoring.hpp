#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mosdist/errors.hpp"
#include "mosdist/level_scheme.hpp"
#include "mosdist/softlabel.hpp"

namespace mosdist {

/// Pre-softmax scores for the level tokens.
struct LevelLogits {
  std::vector<double> values;
};

/// A model-predicted distribution over the levels.
struct PredictedDistribution {
  std::vector<double> probs;
};

/// Throws unless probs is a proper distribution: entries >= 0 and
/// |sum - 1| <= tol.
inline void validate_distribution(std::span<const double> probs,
                                  double tol = 1e-9) {
  if (probs.empty()) {
    throw InvalidInputError("distribution is empty");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidInputError("distribution entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw InvalidInputError("distribution does not sum to 1");
  }
}

/// Softmax restricted to the level entries, stabilized by max subtraction
/// so extreme logits cannot overflow.
inline PredictedDistribution closed_set_softmax(const LevelLogits& logits) {
  if (logits.values.empty()) {
    throw InvalidInputError("closed_set_softmax: no logits");
  }
  for (double v : logits.values) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("closed_set_softmax: non-finite logit");
    }
  }
  const double peak =
      *std::max_element(logits.values.begin(), logits.values.end());
  PredictedDistribution out;
  out.probs.resize(logits.values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.values.size(); ++i) {
    out.probs[i] = std::exp(logits.values[i] - peak);
    sum += out.probs[i];
  }
  for (double& p : out.probs) {
    p /= sum;
  }
  return out;
}

/// Predicted mean score: the expectation of the level centers under the
/// distribution. Always lands inside [c_0, c_last].
inline double expected_score(const PredictedDistribution& dist,
                             const LevelScheme& scheme = LevelScheme()) {
  if (dist.probs.size() != scheme.size()) {
    throw ShapeError("expected_score: distribution size does not match scheme");
  }
  validate_distribution(dist.probs);
  double score = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    score += dist.probs[i] * scheme.center(i);
  }
  return std::clamp(score, scheme.min_center(), scheme.max_center());
}

/// Expectation of a soft label under the same formula.
inline double expected_score(const SoftLabel& label,
                             const LevelScheme& scheme = LevelScheme()) {
  return expected_score(PredictedDistribution{label.probs}, scheme);
}

}  // namespace mosdist
