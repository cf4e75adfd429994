#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/executor.hpp"

namespace multifid {

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One recorded configuration. Curves hold accuracies; index e-1 is the value after
/// epoch e. `adaptive_val_curves` maps a budget to the validation curve of a schedule
/// annealed to that budget.
struct ReplayRecord {
  Configuration config;
  std::uint64_t seed = 0;
  std::vector<double> val_curve;
  std::vector<double> train_curve;
  std::vector<double> test_curve;
  std::map<int, std::vector<double>> adaptive_val_curves;
};

struct ReplayBundle {
  std::string dataset;
  std::string space_ref;  // as written in the file
  std::shared_ptr<const ConfigurationSpace> space;
  int b_max = 0;
  std::size_t n_validation_instances = 0;
  std::size_t n_classes = 2;
  std::uint64_t label_seed = 0;
  std::vector<ReplayRecord> records;
};

/// Loads and validates a replay file; the `space` field is resolved relative to the
/// file's directory unless `space` is supplied.
ReplayBundle load_replay(const std::filesystem::path& path,
                         std::shared_ptr<const ConfigurationSpace> space = nullptr);
json replay_to_json(const ReplayBundle& bundle);
void validate_replay(const ReplayBundle& bundle);

enum class ReplayMode { strict, surrogate };

/// Answers evaluations from recorded curves: loss = 1 - val_curve[budget - 1]. In
/// surrogate mode an unrecorded configuration is answered by its nearest recorded
/// neighbour (Euclidean distance of unit-cube encodings, ties to the earliest record).
class ReplayObjective : public Objective {
 public:
  ReplayObjective(std::shared_ptr<const ReplayBundle> bundle, ReplayMode mode = ReplayMode::surrogate,
                  bool emit_predictions = true, double epoch_seconds = 1.0);

  JobResult evaluate(const Job& job) const override;
  std::string describe() const override { return "replay:" + bundle_->dataset; }
  std::optional<std::vector<int>> validation_labels() const override {
    if (labels_.empty() || !emit_predictions_) return std::nullopt;
    return labels_;
  }

  /// Record used to answer (config, seed); throws ReplayError in strict mode when the
  /// configuration is not recorded.
  const ReplayRecord& lookup(const Configuration& config, std::uint64_t seed) const;
  const ReplayBundle& bundle() const { return *bundle_; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::shared_ptr<const ReplayBundle> bundle_;
  ReplayMode mode_;
  bool emit_predictions_;
  double epoch_seconds_;
  std::map<std::string, std::vector<std::size_t>> by_key_;
  std::vector<std::vector<double>> encodings_;
  std::vector<int> labels_;
};

}  // namespace multifid
