#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mosdist/errors.hpp"
#include "mosdist/scoring.hpp"

namespace mosdist {

/// Distributions to fuse, optionally with non-uniform weights.
struct EnsembleInput {
  std::vector<PredictedDistribution> members;
  std::optional<std::vector<double>> weights;  // must sum to 1 when present
};

/// Element-wise weighted average of member distributions. Uniform weights
/// by default; averaging happens in distribution space, never on the
/// derived scalar scores.
inline PredictedDistribution average_distributions(const EnsembleInput& input) {
  if (input.members.empty()) {
    throw EmptyEnsembleError("average_distributions: no members");
  }
  const std::size_t levels = input.members.front().probs.size();
  for (const auto& member : input.members) {
    if (member.probs.size() != levels) {
      throw ShapeError("average_distributions: member sizes differ");
    }
    validate_distribution(member.probs);
  }

  std::vector<double> weights;
  if (input.weights.has_value()) {
    weights = *input.weights;
    if (weights.size() != input.members.size()) {
      throw ShapeError("average_distributions: weight count != member count");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) {
        throw InvalidInputError("average_distributions: weights must be >= 0");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidInputError("average_distributions: weights must sum to 1");
    }
  } else {
    weights.assign(input.members.size(),
                   1.0 / static_cast<double>(input.members.size()));
  }

  PredictedDistribution out;
  out.probs.assign(levels, 0.0);
  for (std::size_t k = 0; k < input.members.size(); ++k) {
    for (std::size_t i = 0; i < levels; ++i) {
      out.probs[i] += weights[k] * input.members[k].probs[i];
    }
  }
  return out;
}

/// Uniform fusion across prompt variants. Same math as
/// average_distributions; the separate entry point lets reports distinguish
/// prompt ensembles from model ensembles.
inline PredictedDistribution prompt_ensemble(
    const std::vector<PredictedDistribution>& per_prompt) {
  return average_distributions(EnsembleInput{per_prompt, std::nullopt});
}

}  // namespace mosdist
