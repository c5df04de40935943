#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mosdist/errors.hpp"
#include "mosdist/scoring.hpp"
#include "mosdist/softlabel.hpp"

namespace mosdist {

/// Linear-softmax surrogate for a level-token head: maps a feature vector
/// to one logit per level. weights is row-major feature_dim x n_levels.
struct ToyScorer {
  std::size_t feature_dim = 0;
  std::size_t n_levels = 5;
  std::vector<double> weights;
  std::vector<double> bias;

  static ToyScorer zeros(std::size_t feature_dim, std::size_t n_levels = 5) {
    ToyScorer model;
    model.feature_dim = feature_dim;
    model.n_levels = n_levels;
    model.weights.assign(feature_dim * n_levels, 0.0);
    model.bias.assign(n_levels, 0.0);
    return model;
  }
};

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct LabeledExample {
  std::vector<double> features;
  SoftLabel label;
};

/// Gradient of the KL loss with respect to every model parameter, laid out
/// exactly like ToyScorer.
struct ParameterGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// KL divergence D(label || pred) = sum_i p_i log(p_i / p_i^pred).
/// Terms with p_i = 0 contribute nothing; pred entries are floored at
/// 1e-12 inside the log so the loss stays finite.
inline double kl_loss(const SoftLabel& label,
                      const PredictedDistribution& pred) {
  if (label.probs.size() != pred.probs.size()) {
    throw ShapeError("kl_loss: distribution sizes differ");
  }
  validate_distribution(label.probs);
  validate_distribution(pred.probs);
  constexpr double kFloor = 1e-12;
  double loss = 0.0;
  for (std::size_t i = 0; i < label.probs.size(); ++i) {
    const double p = label.probs[i];
    if (p > 0.0) {
      loss += p * std::log(p / std::max(pred.probs[i], kFloor));
    }
  }
  // True KL is non-negative; the floor can shave off at most a few ulps.
  return std::max(loss, 0.0);
}

/// Softmax of the affine map: logits_j = sum_k w[k][j] x_k + b_j.
inline PredictedDistribution forward(const ToyScorer& model,
                                     std::span<const double> features) {
  if (features.size() != model.feature_dim) {
    throw ShapeError("forward: feature dimension mismatch");
  }
  LevelLogits logits;
  logits.values = model.bias;
  for (std::size_t k = 0; k < model.feature_dim; ++k) {
    const double x = features[k];
    if (!std::isfinite(x)) {
      throw InvalidInputError("forward: non-finite feature");
    }
    const double* row = model.weights.data() + k * model.n_levels;
    for (std::size_t j = 0; j < model.n_levels; ++j) {
      logits.values[j] += row[j] * x;
    }
  }
  return closed_set_softmax(logits);
}

/// Analytic gradient of kl_loss(label, forward(model, x)). For the
/// linear-softmax head the logit gradient is (pred - label), giving the
/// outer-product form (pred - label) (x) features for the weights and
/// (pred - label) for the bias.
inline ParameterGradient kl_gradient(const ToyScorer& model,
                                     const LabeledExample& example) {
  const PredictedDistribution pred = forward(model, example.features);
  if (example.label.probs.size() != model.n_levels) {
    throw ShapeError("kl_gradient: label size does not match model");
  }
  std::vector<double> logit_grad(model.n_levels);
  for (std::size_t j = 0; j < model.n_levels; ++j) {
    logit_grad[j] = pred.probs[j] - example.label.probs[j];
  }
  ParameterGradient grad;
  grad.bias = logit_grad;
  grad.weights.resize(model.feature_dim * model.n_levels);
  for (std::size_t k = 0; k < model.feature_dim; ++k) {
    for (std::size_t j = 0; j < model.n_levels; ++j) {
      grad.weights[k * model.n_levels + j] = example.features[k] * logit_grad[j];
    }
  }
  return grad;
}

/// Mean KL loss over a dataset.
inline double mean_kl_loss(const ToyScorer& model,
                           std::span<const LabeledExample> data) {
  if (data.empty()) {
    throw InvalidInputError("mean_kl_loss: empty dataset");
  }
  double total = 0.0;
  for (const auto& example : data) {
    total += kl_loss(example.label, forward(model, example.features));
  }
  return total / static_cast<double>(data.size());
}

/// Mini-batch gradient descent on the KL loss with a fixed learning rate.
/// Parameters start at zero (the objective is convex in them, so no random
/// init is needed); the seed drives only the batch shuffling, making runs
/// bit-reproducible.
inline ToyScorer train(const std::vector<LabeledExample>& data,
                       const TrainConfig& config) {
  if (data.empty()) {
    throw InvalidInputError("train: empty dataset");
  }
  if (!(config.learning_rate > 0.0)) {
    throw InvalidInputError("train: learning rate must be positive");
  }
  if (config.epochs < 1 || config.batch_size < 1) {
    throw InvalidInputError("train: epochs and batch_size must be >= 1");
  }
  const std::size_t feature_dim = data.front().features.size();
  const std::size_t n_levels = data.front().label.probs.size();
  for (const auto& example : data) {
    if (example.features.size() != feature_dim ||
        example.label.probs.size() != n_levels) {
      throw ShapeError("train: inconsistent example shapes");
    }
    validate_distribution(example.label.probs);
  }

  ToyScorer model = ToyScorer::zeros(feature_dim, n_levels);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<double> grad_w(feature_dim * n_levels);
  std::vector<double> grad_b(n_levels);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, order.size());
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      for (std::size_t pos = start; pos < stop; ++pos) {
        const ParameterGradient g = kl_gradient(model, data[order[pos]]);
        for (std::size_t i = 0; i < grad_w.size(); ++i) grad_w[i] += g.weights[i];
        for (std::size_t j = 0; j < grad_b.size(); ++j) grad_b[j] += g.bias[j];
      }
      const double scale =
          config.learning_rate / static_cast<double>(stop - start);
      for (std::size_t i = 0; i < grad_w.size(); ++i) {
        model.weights[i] -= scale * grad_w[i];
      }
      for (std::size_t j = 0; j < grad_b.size(); ++j) {
        model.bias[j] -= scale * grad_b[j];
      }
    }
    const double loss = mean_kl_loss(model, data);
    if (!std::isfinite(loss)) {
      throw DivergenceError("train: non-finite loss after epoch " +
                            std::to_string(epoch));
    }
  }
  return model;
}

/// Checkpoint format: a single JSON document with the model parameters
/// (weights row-major) and an echo of the training config. Stable across
/// versions; the format tag gates loading.
inline nlohmann::json checkpoint_to_json(const ToyScorer& model,
                                         const TrainConfig& config) {
  return nlohmann::json{
      {"format", "mosdist-checkpoint-v1"},
      {"feature_dim", model.feature_dim},
      {"n_levels", model.n_levels},
      {"weights", model.weights},
      {"bias", model.bias},
      {"config",
       {{"learning_rate", config.learning_rate},
        {"epochs", config.epochs},
        {"batch_size", config.batch_size},
        {"seed", config.seed}}},
  };
}

inline ToyScorer checkpoint_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "mosdist-checkpoint-v1") {
    throw ValidationError("checkpoint: missing or unknown format tag");
  }
  ToyScorer model;
  model.feature_dim = doc.at("feature_dim").get<std::size_t>();
  model.n_levels = doc.at("n_levels").get<std::size_t>();
  model.weights = doc.at("weights").get<std::vector<double>>();
  model.bias = doc.at("bias").get<std::vector<double>>();
  if (model.weights.size() != model.feature_dim * model.n_levels ||
      model.bias.size() != model.n_levels) {
    throw ValidationError("checkpoint: parameter shapes are inconsistent");
  }
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw ValidationError("checkpoint: non-finite weight");
  }
  for (double b : model.bias) {
    if (!std::isfinite(b)) throw ValidationError("checkpoint: non-finite bias");
  }
  return model;
}

}  // namespace mosdist
