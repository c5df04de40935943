#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mosdist/ensemble.hpp"
#include "mosdist/errors.hpp"
#include "mosdist/formats.hpp"
#include "mosdist/metrics.hpp"
#include "mosdist/scoring.hpp"
#include "mosdist/softlabel.hpp"
#include "mosdist/trainer.hpp"

namespace mosdist {

/// The three dimensions of the evaluation protocol. Annotation files may
/// carry more, but evaluation requires exactly these.
inline const std::array<std::string, 3> kProtocolDimensions = {
    "overall", "sharpness", "color"};

/// Settings shared by the pipeline operations.
struct RunConfig {
  SigmaMode mode = SigmaMode::pseudo;
  double pseudo_ratio = 0.2;
  LevelScheme scheme;
  std::uint64_t seed = 0;
};

/// Build one label row per (item, dimension), ordered by item_id then
/// dimension so output files are deterministic.
inline std::vector<LabelRow> emit_labels(const std::vector<ScoreRecord>& records,
                                         const RunConfig& config) {
  std::vector<const ScoreRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& record : records) ordered.push_back(&record);
  std::sort(ordered.begin(), ordered.end(),
            [](const ScoreRecord* a, const ScoreRecord* b) {
              return a->item_id < b->item_id;
            });

  const double out_lo = config.scheme.min_center();
  const double out_hi = config.scheme.max_center();
  std::vector<LabelRow> rows;
  for (const ScoreRecord* record : ordered) {
    for (const auto& [dimension, raw_score] : record->scores) {
      LabelRow row;
      row.item_id = record->item_id;
      row.dimension = dimension;
      row.mu = normalize_score(raw_score, record->range_min, record->range_max,
                               out_lo, out_hi);
      LabelOptions options;
      options.mode = config.mode;
      options.pseudo_ratio = config.pseudo_ratio;
      if (config.mode == SigmaMode::true_variance) {
        const auto it = record->sigmas.find(dimension);
        if (it == record->sigmas.end()) {
          throw ValidationError("item '" + record->item_id +
                                "' lacks the sigma column required by "
                                "true-variance mode for '" +
                                dimension + "'");
        }
        options.sigma = normalize_sigma(it->second, record->range_min,
                                        record->range_max, out_lo, out_hi);
      }
      const SoftLabel label = build_label(row.mu, options, config.scheme);
      row.probs = label.probs;
      row.provenance = label.provenance;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Turn label rows into prediction rows: same distributions, scalar score
/// recovered by expectation.
inline std::vector<PredictionRow> score_labels(const LabelFile& labels) {
  std::vector<PredictionRow> rows;
  rows.reserve(labels.rows.size());
  for (const auto& label : labels.rows) {
    PredictionRow row;
    row.item_id = label.item_id;
    row.dimension = label.dimension;
    row.probs = label.probs;
    row.score = expected_score(PredictedDistribution{label.probs}, labels.scheme);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Recompute scalar scores for an existing prediction file (used when only
/// distributions are trusted).
inline std::vector<PredictionRow> score_predictions(const PredictionFile& preds) {
  std::vector<PredictionRow> rows;
  rows.reserve(preds.rows.size());
  for (const auto& pred : preds.rows) {
    if (!pred.probs) {
      throw UnsupportedInputError(
          "score: prediction rows lack distributions; nothing to recompute");
    }
    PredictionRow row = pred;
    row.score = expected_score(PredictedDistribution{*pred.probs}, preds.scheme);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline std::string list_offenders(const std::set<std::string>& keys) {
  std::ostringstream out;
  std::size_t shown = 0;
  for (const auto& key : keys) {
    if (shown == 8) {
      out << ", ... (" << keys.size() - shown << " more)";
      break;
    }
    if (shown > 0) out << ", ";
    out << key;
    ++shown;
  }
  return out.str();
}

}  // namespace detail

/// Score a prediction file against ground-truth annotations. Every
/// ground-truth (item, dimension) pair must have exactly one prediction and
/// vice versa; mismatches fail loudly rather than being dropped or
/// zero-filled.
inline EvalReport evaluate(const std::filesystem::path& predictions_path,
                           const std::filesystem::path& ground_truth_path) {
  const PredictionFile predictions = load_predictions(predictions_path);
  const std::vector<ScoreRecord> truth = load_annotations(ground_truth_path);

  std::map<std::string, std::map<std::string, double>> truth_by_dim;
  for (const auto& record : truth) {
    for (const auto& dim : kProtocolDimensions) {
      const auto it = record.scores.find(dim);
      if (it == record.scores.end()) {
        throw ValidationError("evaluation needs dimension '" + dim +
                              "' but item '" + record.item_id +
                              "' does not provide it");
      }
      truth_by_dim[dim][record.item_id] = it->second;
    }
  }

  std::map<std::string, std::map<std::string, double>> pred_by_dim;
  std::set<std::string> extra;
  for (const auto& row : predictions.rows) {
    const bool known =
        std::find(kProtocolDimensions.begin(), kProtocolDimensions.end(),
                  row.dimension) != kProtocolDimensions.end();
    if (!known || !truth_by_dim[row.dimension].count(row.item_id)) {
      extra.insert(row.item_id + "/" + row.dimension);
      continue;
    }
    if (!pred_by_dim[row.dimension].emplace(row.item_id, *row.score).second) {
      throw ValidationError("duplicate prediction for item '" + row.item_id +
                            "' dimension '" + row.dimension + "'");
    }
  }
  std::set<std::string> missing;
  for (const auto& dim : kProtocolDimensions) {
    for (const auto& [item, unused] : truth_by_dim[dim]) {
      if (!pred_by_dim[dim].count(item)) {
        missing.insert(item + "/" + dim);
      }
    }
  }
  if (!missing.empty() || !extra.empty()) {
    std::string message = "prediction/ground-truth mismatch:";
    if (!missing.empty()) {
      message += " missing predictions for " + detail::list_offenders(missing) + ";";
    }
    if (!extra.empty()) {
      message += " extra predictions for " + detail::list_offenders(extra) + ";";
    }
    throw AlignmentError(message);
  }
  if (truth.size() < 2) {
    throw InsufficientDataError("evaluation needs at least two items");
  }

  std::map<std::string, PairedSeries> series;
  for (const auto& dim : kProtocolDimensions) {
    PairedSeries s;
    for (const auto& [item, gt_score] : truth_by_dim[dim]) {
      s.ground_truth.push_back(gt_score);
      s.predictions.push_back(pred_by_dim[dim].at(item));
    }
    series[dim] = std::move(s);
  }
  return evaluate_series(series.at("overall"), series.at("sharpness"),
                         series.at("color"));
}

/// Element-wise average of several prediction files. All files must supply
/// distribution-form predictions over the same scheme and exactly the same
/// (item, dimension) set.
inline std::vector<PredictionRow> run_ensemble(
    const std::vector<std::filesystem::path>& inputs,
    const std::optional<std::vector<double>>& weights,
    LevelScheme* scheme_out = nullptr) {
  if (inputs.empty()) {
    throw EmptyEnsembleError("ensemble: no prediction files given");
  }
  std::vector<PredictionFile> files;
  files.reserve(inputs.size());
  for (const auto& path : inputs) {
    files.push_back(load_predictions(path));
    if (!(files.front().scheme == files.back().scheme)) {
      throw ValidationError("ensemble: prediction files use different schemes");
    }
  }

  using Key = std::pair<std::string, std::string>;  // (item, dimension)
  std::vector<std::map<Key, const PredictionRow*>> by_key(files.size());
  for (std::size_t f = 0; f < files.size(); ++f) {
    for (const auto& row : files[f].rows) {
      if (!row.probs) {
        throw UnsupportedInputError(
            "ensemble: '" + inputs[f].string() +
            "' holds scalar-only predictions; distributions are required");
      }
      by_key[f][{row.item_id, row.dimension}] = &row;
    }
    if (by_key[f].size() != files[f].rows.size()) {
      throw ValidationError("ensemble: duplicate rows in '" +
                            inputs[f].string() + "'");
    }
  }
  for (std::size_t f = 1; f < files.size(); ++f) {
    if (by_key[f].size() != by_key[0].size() ||
        !std::equal(by_key[f].begin(), by_key[f].end(), by_key[0].begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      std::set<std::string> offenders;
      for (const auto& [key, unused] : by_key[0]) {
        if (!by_key[f].count(key)) offenders.insert(key.first + "/" + key.second);
      }
      for (const auto& [key, unused] : by_key[f]) {
        if (!by_key[0].count(key)) offenders.insert(key.first + "/" + key.second);
      }
      throw AlignmentError("ensemble: item sets differ between '" +
                           inputs[0].string() + "' and '" + inputs[f].string() +
                           "': " + detail::list_offenders(offenders));
    }
  }

  std::vector<PredictionRow> out;
  out.reserve(by_key[0].size());
  for (const auto& [key, first_row] : by_key[0]) {
    EnsembleInput fuse;
    fuse.weights = weights;
    fuse.members.reserve(files.size());
    for (std::size_t f = 0; f < files.size(); ++f) {
      fuse.members.push_back(PredictedDistribution{*by_key[f].at(key)->probs});
    }
    const PredictedDistribution fused = average_distributions(fuse);
    PredictionRow row;
    row.item_id = key.first;
    row.dimension = key.second;
    row.score = expected_score(fused, files.front().scheme);
    row.probs = fused.probs;
    out.push_back(std::move(row));
  }
  if (scheme_out != nullptr) {
    *scheme_out = files.front().scheme;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& report,
                                     const nlohmann::json& config_echo) {
  auto dim = [](const DimensionEval& d) {
    return nlohmann::json{{"srcc", d.srcc}, {"plcc", d.plcc}, {"score", d.score}};
  };
  return nlohmann::json{
      {"format", "mosdist-report-v1"},
      {"dimensions",
       {{"overall", dim(report.overall)},
        {"sharpness", dim(report.sharpness)},
        {"color", dim(report.color)}}},
      {"final", report.final_score},
      {"config", config_echo},
  };
}

inline std::string report_table(const EvalReport& report) {
  auto line = [](const std::string& name, const DimensionEval& d) {
    std::ostringstream out;
    out << "  " << name;
    for (std::size_t i = name.size(); i < 12; ++i) out << ' ';
    out.setf(std::ios::fixed);
    out.precision(6);
    out << d.srcc << "  " << d.plcc << "  " << d.score << '\n';
    return out.str();
  };
  std::ostringstream out;
  out << "  dimension   srcc      plcc      score\n";
  out << line("overall", report.overall);
  out << line("sharpness", report.sharpness);
  out << line("color", report.color);
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "  final " << report.final_score << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic data for the toy trainer
// ---------------------------------------------------------------------------

struct SyntheticDataset {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> holdout;
  std::vector<double> holdout_mu;  // true mean scores for the holdout items
};

/// Monotone synthetic regression set: scalar features x ~ U[0, 1) and
/// labels built from mu = c_0 + (c_last - c_0) * x. The trainer should
/// recover the ordering of mu from these labels.
inline SyntheticDataset make_monotone_dataset(std::size_t n,
                                              double holdout_fraction,
                                              const LabelOptions& options,
                                              const LevelScheme& scheme,
                                              std::uint64_t seed) {
  if (n < 4) {
    throw InvalidInputError("make_monotone_dataset: need at least 4 examples");
  }
  if (!(holdout_fraction >= 0.0) || holdout_fraction >= 1.0) {
    throw InvalidInputError("make_monotone_dataset: bad holdout fraction");
  }
  std::mt19937_64 rng(seed);
  const double span = scheme.max_center() - scheme.min_center();
  const std::size_t holdout_count =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   holdout_fraction * static_cast<double>(n)));
  SyntheticDataset dataset;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double mu = scheme.min_center() + span * x;
    LabeledExample example;
    example.features = {x};
    example.label = build_label(mu, options, scheme);
    if (i < n - holdout_count) {
      dataset.train.push_back(std::move(example));
    } else {
      dataset.holdout.push_back(std::move(example));
      dataset.holdout_mu.push_back(mu);
    }
  }
  return dataset;
}

}  // namespace mosdist
