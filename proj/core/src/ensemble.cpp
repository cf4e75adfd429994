#include "multifid/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "multifid/run_io.hpp"

namespace multifid {

const PredictionEntry* PredictionStore::find(const std::string& model_id) const {
  for (const auto& e : entries)
    if (e.model_id == model_id) return &e;
  return nullptr;
}

void PredictionStore::validate() const {
  if (entries.empty()) return;
  const auto rows = entries.front().predictions.rows();
  const auto cols = entries.front().predictions.cols();
  if (labels.size() != rows) throw std::invalid_argument("label count does not match prediction rows");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= cols) throw std::invalid_argument("label out of range");
  for (const auto& e : entries) {
    if (e.predictions.rows() != rows || e.predictions.cols() != cols)
      throw std::invalid_argument("prediction shape mismatch for " + e.model_id);
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (double p : e.predictions.row(i)) s += p;
      if (std::abs(s - 1.0) > 1e-6) throw std::invalid_argument("prediction row does not sum to 1 in " + e.model_id);
    }
  }
}

std::string to_string(EnsembleMetric m) { return m == EnsembleMetric::accuracy ? "accuracy" : "balanced_accuracy"; }

EnsembleMetric metric_from_string(const std::string& s) {
  if (s == "accuracy") return EnsembleMetric::accuracy;
  if (s == "balanced_accuracy" || s == "balanced-accuracy") return EnsembleMetric::balanced_accuracy;
  throw std::invalid_argument("unknown metric: " + s);
}

namespace {

std::size_t argmax_row(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

// Scores the average (sum / count) without materializing it; argmax is scale invariant.
double score_sum(const std::vector<double>& sum, std::size_t cols, const std::vector<int>& labels,
                 EnsembleMetric metric) {
  const std::size_t n = labels.size();
  if (metric == EnsembleMetric::accuracy) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (argmax_row({sum.data() + i * cols, cols}) == static_cast<std::size_t>(labels[i])) ++hits;
    return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  }
  std::vector<std::size_t> support(cols, 0), hits(cols, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    ++support[y];
    if (argmax_row({sum.data() + i * cols, cols}) == y) ++hits[y];
  }
  double total = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    if (!support[c]) continue;
    total += static_cast<double>(hits[c]) / static_cast<double>(support[c]);
    ++present;
  }
  return present ? total / static_cast<double>(present) : 0.0;
}

}  // namespace

double score_predictions(const Matrix& predictions, const std::vector<int>& labels, EnsembleMetric metric) {
  if (predictions.rows() != labels.size()) throw std::invalid_argument("label count does not match prediction rows");
  return score_sum(predictions.data(), predictions.cols(), labels, metric);
}

double WeightedEnsemble::weight(const std::string& model_id) const {
  for (const auto& [id, count] : members)
    if (id == model_id) return static_cast<double>(count) / static_cast<double>(size);
  return 0.0;
}

nlohmann::json WeightedEnsemble::to_json() const {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& [id, count] : members) m.push_back({{"model_id", id}, {"count", count}});
  return {{"members", m}, {"size", size}, {"rounds", rounds}, {"metric", to_string(metric)}, {"score", score},
          {"round_scores", round_scores}};
}

PredictionStore topk_filter(const PredictionStore& store, std::size_t k) {
  if (store.entries.empty()) throw std::invalid_argument("prediction store is empty");
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::vector<std::size_t> idx(store.entries.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return store.entries[a].val_loss < store.entries[b].val_loss;
  });
  idx.resize(std::min(k, idx.size()));
  std::sort(idx.begin(), idx.end());
  PredictionStore out;
  out.labels = store.labels;
  for (auto i : idx) out.entries.push_back(store.entries[i]);
  return out;
}

WeightedEnsemble greedy_select(const PredictionStore& store, std::size_t ensemble_size, EnsembleMetric metric) {
  if (store.entries.empty()) throw std::invalid_argument("prediction store is empty");
  if (ensemble_size == 0) throw std::invalid_argument("ensemble size must be at least 1");
  store.validate();
  const auto rows = store.entries.front().predictions.rows();
  const auto cols = store.entries.front().predictions.cols();
  std::vector<double> sum(rows * cols, 0.0), trial(rows * cols);
  std::vector<std::size_t> counts(store.entries.size(), 0);
  std::vector<std::size_t> first_pick, picks;

  WeightedEnsemble out;
  out.rounds = ensemble_size;
  out.metric = metric;
  for (std::size_t round = 0; round < ensemble_size; ++round) {
    std::size_t best = store.entries.size();
    double best_score = -1.0;
    for (std::size_t m = 0; m < store.entries.size(); ++m) {
      const auto& p = store.entries[m].predictions.data();
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = sum[i] + p[i];
      const double s = score_sum(trial, cols, store.labels, metric);
      if (s > best_score) {
        best_score = s;
        best = m;
      }
    }
    const auto& p = store.entries[best].predictions.data();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p[i];
    picks.push_back(best);
    out.selection_order.push_back(store.entries[best].model_id);
    out.round_scores.push_back(best_score);
  }
  // Keep the best-scoring prefix of the selection sequence, the longest among ties.
  std::size_t keep = 0;
  for (std::size_t r = 0; r < out.round_scores.size(); ++r)
    if (out.round_scores[r] >= out.round_scores[keep]) keep = r;
  for (std::size_t r = 0; r <= keep; ++r)
    if (counts[picks[r]]++ == 0) first_pick.push_back(picks[r]);
  for (auto m : first_pick) out.members.emplace_back(store.entries[m].model_id, counts[m]);
  out.size = keep + 1;
  out.score = out.round_scores[keep];
  return out;
}

Matrix ensemble_predict(const WeightedEnsemble& ensemble, const PredictionStore& store) {
  if (ensemble.members.empty()) throw std::invalid_argument("ensemble has no members");
  const PredictionEntry* first = store.find(ensemble.members.front().first);
  if (!first) throw std::invalid_argument("missing predictions for " + ensemble.members.front().first);
  Matrix out(first->predictions.rows(), first->predictions.cols(), 0.0);
  for (const auto& [id, count] : ensemble.members) {
    const PredictionEntry* e = store.find(id);
    if (!e) throw std::invalid_argument("missing predictions for " + id);
    if (e->predictions.rows() != out.rows() || e->predictions.cols() != out.cols())
      throw std::invalid_argument("prediction shape mismatch for " + id);
    const double w = static_cast<double>(count) / static_cast<double>(ensemble.size);
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += w * e->predictions.data()[i];
  }
  return out;
}

std::vector<TrajectoryStep> ensemble_trajectory(const PredictionStore& store, std::size_t k,
                                                std::size_t ensemble_size, EnsembleMetric metric) {
  if (store.entries.empty()) throw std::invalid_argument("no predictions stored");
  std::set<double> times;
  for (const auto& e : store.entries) times.insert(e.timestamp);
  std::vector<TrajectoryStep> out;
  for (double t : times) {
    PredictionStore sub;
    sub.labels = store.labels;
    for (const auto& e : store.entries)
      if (e.timestamp <= t) sub.entries.push_back(e);
    const auto ens = greedy_select(topk_filter(sub, k), ensemble_size, metric);
    out.push_back({t, sub.entries.size(), ens.score});
  }
  return out;
}

PredictionStore load_prediction_store(const std::filesystem::path& predictions_dir) {
  const auto manifest_path = predictions_dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("no predictions stored in " + predictions_dir.string());
  const auto manifest = nlohmann::json::parse(in);
  PredictionStore store;
  const Matrix labels = read_matrix_csv(predictions_dir / manifest.value("labels", std::string("labels.csv")));
  for (double l : labels.data()) store.labels.push_back(static_cast<int>(std::lround(l)));
  for (const auto& m : manifest.at("models")) {
    PredictionEntry e;
    e.model_id = m.at("model_id").get<std::string>();
    e.budget = m.at("budget").get<double>();
    e.val_loss = m.at("val_loss").get<double>();
    e.timestamp = m.at("timestamp").get<double>();
    e.predictions = read_matrix_csv(predictions_dir / m.at("file").get<std::string>());
    store.entries.push_back(std::move(e));
  }
  if (store.entries.empty()) throw std::runtime_error("no predictions stored in " + predictions_dir.string());
  store.validate();
  return store;
}

}  // namespace multifid
