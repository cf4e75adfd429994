#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "multifid/configspace.hpp"

namespace multifid {

enum class Origin { random, model, portfolio };

std::string to_string(Origin origin);
Origin origin_from_string(const std::string& s);

struct EvaluationRecord {
  std::uint64_t config_id = 0;
  Configuration configuration;
  double budget = 0.0;
  std::uint64_t seed = 0;
  double loss = 0.0;  // minimized; 1 - validation accuracy for replayed benchmarks
  bool crashed = false;
  std::optional<std::vector<double>> learning_curve;
  double wall_time = 0.0;  // duration reported for this evaluation
  double timestamp = 0.0;  // run clock when the result was recorded
  Origin origin = Origin::random;
  int bracket = 0;  // outer-loop iteration
  int rung = 0;

  json to_json() const;
  static EvaluationRecord from_json(const json& j, const ConfigurationSpace& space);
};

struct TrajectoryPoint {
  double wall_time = 0.0;
  std::size_t n_evals = 0;
  double budget = 0.0;
  double incumbent_loss = 0.0;
};

/// Append-only evaluation log. The incumbent trajectory tracks the best loss observed at
/// `trajectory_budget` and is non-increasing by construction.
class RunHistory {
 public:
  explicit RunHistory(double trajectory_budget = 0.0) : trajectory_budget_(trajectory_budget) {}

  void append(EvaluationRecord record);
  const std::vector<EvaluationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::vector<std::size_t> indices_at(double budget) const;
  std::size_t count_at(double budget) const;
  const std::vector<TrajectoryPoint>& trajectory() const { return trajectory_; }
  double trajectory_budget() const { return trajectory_budget_; }

 private:
  std::vector<EvaluationRecord> records_;
  std::vector<TrajectoryPoint> trajectory_;
  double trajectory_budget_;
  std::optional<double> best_;
};

class NoRecordsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowest-loss record at `budget`, ties to the earliest. Throws NoRecordsError.
const EvaluationRecord& incumbent(const RunHistory& history, double budget);

}  // namespace multifid
