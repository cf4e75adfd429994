#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/executor.hpp"
#include "multifid/optimizer.hpp"
#include "multifid/run_history.hpp"

namespace multifid {

// Run directory layout:
//   space.json         copy of the configuration space
//   runhistory.jsonl   one EvaluationRecord per line, in completion order
//   trajectory.csv     wall_time_s,n_evals,budget,incumbent_loss
//   meta.json          ladder, limits, seed, objective, run id
//   predictions/       <model_id>.csv per evaluation with predictions, labels.csv,
//                      manifest.json ({model_id, budget, val_loss, timestamp, file})

struct RunMeta {
  std::string objective;
  std::string space_path;
  std::optional<std::string> portfolio_path;
  BudgetLadder ladder;
  RunLimits limits;

  json to_json() const;
  /// Deterministic short hex digest of the run inputs.
  std::string run_id() const;
};

std::string model_id_for(const EvaluationRecord& record);
/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Streams a run to disk: each record is appended (and flushed) as it completes, so an
/// interrupted run leaves a valid, possibly truncated, history.
class RunWriter {
 public:
  RunWriter(std::filesystem::path dir, const ConfigurationSpace& space, RunMeta meta,
            std::optional<std::vector<int>> labels);

  void write_record(const EvaluationRecord& record, const JobResult& result);
  void finalize(const RunHistory& history);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  RunMeta meta_;
  std::ofstream history_out_;
  json manifest_ = json::array();
  bool has_labels_ = false;
};

struct LoadedRun {
  std::shared_ptr<const ConfigurationSpace> space;
  RunHistory history;
  json meta;
};

/// Reads runhistory.jsonl; a malformed final line (interrupted write) is ignored.
std::vector<EvaluationRecord> read_runhistory(const std::filesystem::path& file, const ConfigurationSpace& space);
LoadedRun load_run(const std::filesystem::path& dir);

void write_matrix_csv(const std::filesystem::path& file, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& file);

}  // namespace multifid
