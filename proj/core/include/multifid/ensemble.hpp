#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "multifid/matrix.hpp"

namespace multifid {

struct PredictionEntry {
  std::string model_id;
  double budget = 0.0;
  Matrix predictions;  // instances x classes, rows are probability vectors
  double val_loss = 1.0;
  double timestamp = 0.0;
};

struct PredictionStore {
  std::vector<PredictionEntry> entries;
  std::vector<int> labels;

  std::size_t n_classes() const { return entries.empty() ? 0 : entries.front().predictions.cols(); }
  const PredictionEntry* find(const std::string& model_id) const;
  /// Throws std::invalid_argument on mismatched shapes, bad rows or out-of-range labels.
  void validate() const;
};

enum class EnsembleMetric { accuracy, balanced_accuracy };

std::string to_string(EnsembleMetric m);
EnsembleMetric metric_from_string(const std::string& s);

double score_predictions(const Matrix& predictions, const std::vector<int>& labels, EnsembleMetric metric);

struct WeightedEnsemble {
  std::vector<std::pair<std::string, std::size_t>> members;  // in first-selection order
  std::size_t size = 0;    // members kept (sum of counts)
  std::size_t rounds = 0;  // selection rounds run
  EnsembleMetric metric = EnsembleMetric::accuracy;
  double score = 0.0;
  std::vector<std::string> selection_order;  // model picked in each round
  std::vector<double> round_scores;

  double weight(const std::string& model_id) const;
  nlohmann::json to_json() const;
};

/// k entries with the lowest validation loss, in their original store order.
PredictionStore topk_filter(const PredictionStore& store, std::size_t k);

/// Caruana selection with replacement for `ensemble_size` rounds; ties go to the earlier
/// store entry. The result is the best-scoring prefix of the selection sequence.
WeightedEnsemble greedy_select(const PredictionStore& store, std::size_t ensemble_size,
                               EnsembleMetric metric = EnsembleMetric::accuracy);

Matrix ensemble_predict(const WeightedEnsemble& ensemble, const PredictionStore& store);

struct TrajectoryStep {
  double timestamp = 0.0;
  std::size_t n_models = 0;
  double score = 0.0;
};

/// Re-runs topk_filter + greedy_select at every distinct stored timestamp, using only
/// the models finished by then.
std::vector<TrajectoryStep> ensemble_trajectory(const PredictionStore& store, std::size_t k,
                                                std::size_t ensemble_size, EnsembleMetric metric);

/// Reads predictions/manifest.json, labels.csv and one CSV per model.
PredictionStore load_prediction_store(const std::filesystem::path& predictions_dir);

}  // namespace multifid
