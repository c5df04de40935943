#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "mosdist/errors.hpp"

namespace mosdist {

/// Predictions paired with ground truth, one entry per item.
struct PairedSeries {
  std::vector<double> predictions;
  std::vector<double> ground_truth;
};

namespace detail {

inline void validate_series(const PairedSeries& series) {
  if (series.predictions.size() != series.ground_truth.size()) {
    throw ShapeError("paired series lengths differ");
  }
  if (series.predictions.size() < 2) {
    throw InsufficientDataError("paired series needs at least two items");
  }
  for (double v : series.predictions) {
    if (!std::isfinite(v)) throw InvalidInputError("non-finite prediction");
  }
  for (double v : series.ground_truth) {
    if (!std::isfinite(v)) throw InvalidInputError("non-finite ground truth");
  }
}

/// Two-pass Pearson correlation on raw values.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelationError(
        "correlation undefined: a series has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace detail

/// Fractional (mean) ranks, 1-based; every member of a tie group receives
/// the average of the ranks the group spans.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) {
      ++j;
    }
    // Positions i..j-1 (0-based) share the mean of ranks i+1..j.
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      ranks[order[k]] = mean_rank;
    }
    i = j;
  }
  return ranks;
}

/// Pearson Linear Correlation Coefficient.
inline double plcc(const PairedSeries& series) {
  detail::validate_series(series);
  return detail::pearson(series.predictions, series.ground_truth);
}

/// Spearman Rank-order Correlation Coefficient: Pearson correlation of the
/// fractional ranks of both series.
inline double srcc(const PairedSeries& series) {
  detail::validate_series(series);
  const std::vector<double> rx = fractional_ranks(series.predictions);
  const std::vector<double> ry = fractional_ranks(series.ground_truth);
  return detail::pearson(rx, ry);
}

/// Per-dimension benchmark score: the average of SRCC and PLCC.
inline double dimension_score(double srcc_val, double plcc_val) {
  return 0.5 * (srcc_val + plcc_val);
}

/// Benchmark aggregate: overall counts double the other two dimensions.
inline double final_score(double s_overall, double s_sharpness,
                          double s_color) {
  return 0.5 * s_overall + 0.25 * s_sharpness + 0.25 * s_color;
}

struct DimensionEval {
  double srcc = 0.0;
  double plcc = 0.0;
  double score = 0.0;
};

/// Full evaluation protocol output: SRCC/PLCC and score per dimension,
/// plus the weighted final score.
struct EvalReport {
  DimensionEval overall;
  DimensionEval sharpness;
  DimensionEval color;
  double final_score = 0.0;
};

inline DimensionEval evaluate_dimension(const PairedSeries& series) {
  DimensionEval eval;
  eval.srcc = srcc(series);
  eval.plcc = plcc(series);
  eval.score = dimension_score(eval.srcc, eval.plcc);
  return eval;
}

inline EvalReport evaluate_series(const PairedSeries& overall,
                                  const PairedSeries& sharpness,
                                  const PairedSeries& color) {
  EvalReport report;
  report.overall = evaluate_dimension(overall);
  report.sharpness = evaluate_dimension(sharpness);
  report.color = evaluate_dimension(color);
  report.final_score = final_score(report.overall.score,
                                   report.sharpness.score, report.color.score);
  return report;
}

}  // namespace mosdist
