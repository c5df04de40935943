// mosdist: soft-label construction, score recovery, ensembling, and
// SRCC/PLCC evaluation for mean-opinion-score datasets.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mosdist/mosdist.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<double> pseudo_ratio;
};

// Merge precedence: built-in defaults < config file < explicit flags.
// The config file comes from --config, or from MOSDIST_CONFIG when set.
mosdist::RunConfig resolve_config(const CommonOptions& opts) {
  mosdist::RunConfig config;
  std::string config_path = opts.config_path;
  if (config_path.empty()) {
    if (const char* env = std::getenv("MOSDIST_CONFIG")) {
      config_path = env;
    }
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      throw mosdist::IoError("cannot open config " + config_path);
    }
    json doc = json::parse(in);
    if (doc.contains("mode")) {
      config.mode = mosdist::sigma_mode_from_string(doc["mode"].get<std::string>());
    }
    if (doc.contains("pseudo_ratio")) {
      config.pseudo_ratio = doc["pseudo_ratio"].get<double>();
    }
    if (doc.contains("seed")) {
      config.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("centers")) {
      auto centers = doc["centers"].get<std::vector<double>>();
      const double width = doc.value("width", 1.0);
      std::vector<std::string> names;
      if (doc.contains("names")) {
        names = doc["names"].get<std::vector<std::string>>();
      }
      config.scheme = mosdist::LevelScheme(centers, width, names);
    }
  }
  if (!opts.mode.empty()) {
    config.mode = mosdist::sigma_mode_from_string(opts.mode);
  }
  if (opts.pseudo_ratio) config.pseudo_ratio = *opts.pseudo_ratio;
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

std::string detect_format(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw mosdist::IoError("cannot open " + path.string());
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#mosdist ", 0) == 0) {
      const auto rest = line.substr(9);
      return rest.substr(0, rest.find(' '));
    }
    break;
  }
  throw mosdist::ParseError(path.string(), 1, "not a mosdist file");
}

std::vector<mosdist::ScoreRecord> records_from_panels(
    const std::vector<mosdist::PanelRow>& panels) {
  std::map<std::string, mosdist::ScoreRecord> by_item;
  for (const auto& panel : panels) {
    mosdist::AnnotatorPanel ap;
    ap.ratings = panel.ratings;
    const mosdist::ScoreDistribution stats = mosdist::empirical_stats(ap);
    auto& record = by_item[panel.item_id];
    record.item_id = panel.item_id;
    record.range_min = 1.0;
    record.range_max = 5.0;
    record.scores[panel.dimension] = stats.mu;
    record.sigmas[panel.dimension] = stats.sigma;
  }
  std::vector<mosdist::ScoreRecord> records;
  records.reserve(by_item.size());
  for (auto& [unused, record] : by_item) records.push_back(std::move(record));
  return records;
}

int run_label(const CommonOptions& common, const std::string& input,
              const std::string& output) {
  const mosdist::RunConfig config = resolve_config(common);
  std::vector<mosdist::ScoreRecord> records;
  const std::string kind = detect_format(input);
  if (kind == "annotations") {
    records = mosdist::load_annotations(input);
  } else if (kind == "panels") {
    records = records_from_panels(mosdist::load_panels(input));
  } else {
    throw mosdist::UnsupportedInputError(
        "label: input must be an annotations or panels file, got '" + kind + "'");
  }
  const auto rows = mosdist::emit_labels(records, config);
  mosdist::write_labels(output, config.scheme, rows);
  std::cout << "wrote " << rows.size() << " label rows to " << output << "\n";
  return 0;
}

int run_score(const std::string& input, const std::string& output) {
  const std::string kind = detect_format(input);
  std::vector<mosdist::PredictionRow> rows;
  mosdist::LevelScheme scheme;
  if (kind == "labels") {
    const mosdist::LabelFile labels = mosdist::load_labels(input);
    scheme = labels.scheme;
    rows = mosdist::score_labels(labels);
  } else if (kind == "predictions") {
    const mosdist::PredictionFile preds = mosdist::load_predictions(input);
    scheme = preds.scheme;
    rows = mosdist::score_predictions(preds);
  } else {
    throw mosdist::UnsupportedInputError(
        "score: input must be a labels or predictions file, got '" + kind + "'");
  }
  mosdist::write_predictions(output, scheme, rows);
  std::cout << "wrote " << rows.size() << " predictions to " << output << "\n";
  return 0;
}

int run_ensemble_cmd(const std::vector<std::string>& inputs,
                     const std::vector<double>& weights,
                     const std::string& output) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  std::optional<std::vector<double>> w;
  if (!weights.empty()) w = weights;
  mosdist::LevelScheme scheme;
  const auto rows = mosdist::run_ensemble(paths, w, &scheme);
  mosdist::write_predictions(output, scheme, rows);
  std::cout << "fused " << inputs.size() << " files into " << output << "\n";
  return 0;
}

int run_eval(const std::string& predictions, const std::string& ground_truth,
             const std::string& output) {
  const mosdist::EvalReport report = mosdist::evaluate(predictions, ground_truth);
  std::cout << mosdist::report_table(report);
  if (!output.empty()) {
    json echo{{"predictions", predictions}, {"ground_truth", ground_truth}};
    std::ofstream out(output);
    if (!out) {
      throw mosdist::IoError("cannot write " + output);
    }
    out << mosdist::report_to_json(report, echo).dump(2) << "\n";
    std::cout << "report written to " << output << "\n";
  }
  return 0;
}

int run_train_toy(const CommonOptions& common, std::size_t n, double holdout,
                  int epochs, double learning_rate, int batch_size,
                  const std::string& output) {
  const mosdist::RunConfig config = resolve_config(common);
  mosdist::LabelOptions options;
  options.mode = config.mode;
  options.pseudo_ratio = config.pseudo_ratio;
  if (options.mode == mosdist::SigmaMode::true_variance) {
    throw mosdist::UnsupportedInputError(
        "train-toy: synthetic data has no per-item variance; use interp or pseudo");
  }
  const mosdist::SyntheticDataset dataset = mosdist::make_monotone_dataset(
      n, holdout, options, config.scheme, config.seed);

  mosdist::TrainConfig train_config;
  train_config.learning_rate = learning_rate;
  train_config.epochs = epochs;
  train_config.batch_size = batch_size;
  train_config.seed = config.seed;

  const double initial_loss = mosdist::mean_kl_loss(
      mosdist::ToyScorer::zeros(1, config.scheme.size()), dataset.train);
  const mosdist::ToyScorer model = mosdist::train(dataset.train, train_config);
  const double final_loss = mosdist::mean_kl_loss(model, dataset.train);

  mosdist::PairedSeries holdout_series;
  for (std::size_t i = 0; i < dataset.holdout.size(); ++i) {
    const auto pred = mosdist::forward(model, dataset.holdout[i].features);
    holdout_series.predictions.push_back(
        mosdist::expected_score(pred, config.scheme));
    holdout_series.ground_truth.push_back(dataset.holdout_mu[i]);
  }
  const double holdout_srcc = mosdist::srcc(holdout_series);

  std::cout << "train examples:  " << dataset.train.size() << "\n";
  std::cout << "holdout examples: " << dataset.holdout.size() << "\n";
  std::cout << "initial mean KL: " << initial_loss << "\n";
  std::cout << "final mean KL:   " << final_loss << "\n";
  std::cout << "holdout SRCC:    " << holdout_srcc << "\n";

  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) {
      throw mosdist::IoError("cannot write " + output);
    }
    out << mosdist::checkpoint_to_json(model, train_config).dump(2) << "\n";
    std::cout << "checkpoint written to " << output << "\n";
  }
  return 0;
}

int run_simulate(const CommonOptions& common, std::size_t items,
                 std::size_t raters, const std::string& output,
                 const std::string& annotations_out) {
  const mosdist::RunConfig config = resolve_config(common);
  std::mt19937_64 rng(config.seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };

  int width = 1;
  for (std::size_t radix = 10; radix < items; radix *= 10) ++width;

  std::vector<mosdist::PanelRow> panels;
  for (std::size_t i = 0; i < items; ++i) {
    std::string id = std::to_string(i);
    id.insert(0, static_cast<std::size_t>(width) > id.size()
                     ? static_cast<std::size_t>(width) - id.size()
                     : 0,
              '0');
    for (const auto& dim : mosdist::kProtocolDimensions) {
      const double mu = uniform(1.5, 4.5);
      const double sigma = uniform(0.2, 0.8);
      const std::uint64_t panel_seed = rng();
      const mosdist::AnnotatorPanel panel =
          mosdist::simulate_panel(mu, sigma, raters, panel_seed);
      mosdist::PanelRow row;
      row.item_id = "item-" + id;
      row.dimension = dim;
      row.true_mu = panel.true_mu;
      row.true_sigma = panel.true_sigma;
      row.ratings = panel.ratings;
      panels.push_back(std::move(row));
    }
  }
  mosdist::write_panels(output, panels);
  std::cout << "wrote " << panels.size() << " panels to " << output << "\n";

  if (!annotations_out.empty()) {
    const auto records = records_from_panels(panels);
    const std::vector<std::string> dims(mosdist::kProtocolDimensions.begin(),
                                        mosdist::kProtocolDimensions.end());
    mosdist::write_annotations(annotations_out, records, dims, true);
    std::cout << "wrote sample-stat annotations to " << annotations_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-based quality score toolkit"};
  app.require_subcommand(1);

  CommonOptions common;

  // label
  std::string label_input, label_output;
  auto* label = app.add_subcommand(
      "label", "build soft labels from annotations or rating panels");
  label->add_option("--input", label_input, "annotations or panels file")
      ->required();
  label->add_option("--output", label_output, "label file to write")->required();
  label->add_option("--mode", common.mode,
                    "label construction mode: pseudo | interp | true-variance");
  label->add_option("--pseudo-ratio", common.pseudo_ratio,
                    "pseudo-sigma ratio of the raw score range (default 0.2)");
  label->add_option("--config", common.config_path, "JSON config file");
  label->add_option("--seed", common.seed, "random seed echo");

  // score
  std::string score_input, score_output;
  auto* score = app.add_subcommand(
      "score", "recover scalar scores from label/prediction distributions");
  score->add_option("--input", score_input, "labels or predictions file")
      ->required();
  score->add_option("--output", score_output, "prediction file to write")
      ->required();
  score->add_option("--config", common.config_path, "JSON config file");
  score->add_option("--seed", common.seed, "random seed echo");

  // ensemble
  std::vector<std::string> ensemble_inputs;
  std::vector<double> ensemble_weights;
  std::string ensemble_output;
  auto* ensemble = app.add_subcommand(
      "ensemble", "average prediction distributions element-wise");
  ensemble->add_option("--inputs", ensemble_inputs, "prediction files")
      ->required()
      ->expected(-1);
  ensemble->add_option("--weights", ensemble_weights,
                       "member weights summing to 1 (default uniform)");
  ensemble->add_option("--output", ensemble_output, "fused prediction file")
      ->required();
  ensemble->add_option("--config", common.config_path, "JSON config file");
  ensemble->add_option("--seed", common.seed, "random seed echo");

  // eval
  std::string eval_predictions, eval_truth, eval_output;
  auto* eval = app.add_subcommand(
      "eval", "score predictions against ground-truth annotations");
  eval->add_option("--predictions", eval_predictions, "prediction file")
      ->required();
  eval->add_option("--ground-truth", eval_truth, "annotations file")->required();
  eval->add_option("--output", eval_output, "JSON report path");
  eval->add_option("--config", common.config_path, "JSON config file");
  eval->add_option("--seed", common.seed, "random seed echo");

  // train-toy
  std::size_t toy_n = 2000;
  double toy_holdout = 0.2;
  int toy_epochs = 200;
  double toy_lr = 0.5;
  int toy_batch = 64;
  std::string toy_output;
  auto* train_toy = app.add_subcommand(
      "train-toy", "train the toy scorer on a synthetic monotone dataset");
  train_toy->add_option("--n", toy_n, "number of synthetic examples");
  train_toy->add_option("--holdout", toy_holdout, "holdout fraction");
  train_toy->add_option("--epochs", toy_epochs, "training epochs");
  train_toy->add_option("--lr", toy_lr, "learning rate");
  train_toy->add_option("--batch-size", toy_batch, "mini-batch size");
  train_toy->add_option("--mode", common.mode,
                        "label construction mode: pseudo | interp");
  train_toy->add_option("--output", toy_output, "checkpoint JSON path");
  train_toy->add_option("--config", common.config_path, "JSON config file");
  train_toy->add_option("--seed", common.seed, "random seed");

  // simulate
  std::size_t sim_items = 100;
  std::size_t sim_raters = 25;
  std::string sim_output, sim_annotations;
  auto* simulate = app.add_subcommand(
      "simulate", "generate synthetic annotator panels");
  simulate->add_option("--items", sim_items, "number of items");
  simulate->add_option("--raters", sim_raters, "annotators per panel");
  simulate->add_option("--output", sim_output, "panels file to write")
      ->required();
  simulate->add_option("--annotations-out", sim_annotations,
                       "also write sample-stat annotations here");
  simulate->add_option("--config", common.config_path, "JSON config file");
  simulate->add_option("--seed", common.seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (label->parsed()) return run_label(common, label_input, label_output);
    if (score->parsed()) return run_score(score_input, score_output);
    if (ensemble->parsed()) {
      return run_ensemble_cmd(ensemble_inputs, ensemble_weights, ensemble_output);
    }
    if (eval->parsed()) return run_eval(eval_predictions, eval_truth, eval_output);
    if (train_toy->parsed()) {
      return run_train_toy(common, toy_n, toy_holdout, toy_epochs, toy_lr,
                           toy_batch, toy_output);
    }
    if (simulate->parsed()) {
      return run_simulate(common, sim_items, sim_raters, sim_output,
                          sim_annotations);
    }
  } catch (const mosdist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
