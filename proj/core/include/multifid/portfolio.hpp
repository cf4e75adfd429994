#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/executor.hpp"
#include "multifid/matrix.hpp"

namespace multifid {

/// Candidate-by-dataset validation accuracies at b_max.
struct PerformanceMatrix {
  std::vector<Configuration> candidates;
  std::vector<std::string> candidate_sources;  // run each candidate came from
  std::vector<std::string> datasets;
  Matrix scores;               // |candidates| x |datasets|, accuracies in [0, 1]
  std::vector<bool> imputed;   // row-major; true where an evaluation crashed (score 0)

  void validate() const;
};

enum class RegretKind { relative, absolute };

/// R(c, D) = (a*_D - a(c, D)) / a*_D with a*_D the best accuracy on D (0 when a*_D = 0);
/// the absolute variant drops the normalization.
Matrix relative_regret(const Matrix& scores, RegretKind kind = RegretKind::relative);
inline Matrix relative_regret(const PerformanceMatrix& m, RegretKind kind = RegretKind::relative) {
  return relative_regret(m.scores, kind);
}

struct GreedyPortfolio {
  std::vector<std::size_t> order;    // candidate rows in insertion order
  std::vector<double> mean_regret;   // mean over datasets of the portfolio's min-regret, per size
};

/// Greedy minimization of summed per-dataset min-regret; ties go to the lower
/// candidate index. Throws for size 0 or size > number of candidates.
GreedyPortfolio greedy_build(const Matrix& regrets, std::size_t size);

/// (size, mean min-regret) along the greedy trajectory.
std::vector<std::pair<std::size_t, double>> portfolio_size_curve(const Matrix& regrets, std::size_t max_size);

struct Portfolio {
  std::string space_ref;
  std::vector<Configuration> entries;
  std::vector<std::string> source_runs;
  std::vector<double> regret_curve;
  std::vector<std::string> dataset_ids;

  json to_json() const;
  static Portfolio from_json(const json& j, const ConfigurationSpace& space);
  static Portfolio load(const std::filesystem::path& path, const ConfigurationSpace& space);
  void save(const std::filesystem::path& path) const;
};

Portfolio make_portfolio(const PerformanceMatrix& matrix, const GreedyPortfolio& greedy, std::string space_ref);

/// Evaluates the b_max incumbent of every run directory on every objective. Duplicate
/// incumbents (identical configurations) are kept once. Crashed cells score 0 and are
/// flagged. Throws NoRecordsError for a run without b_max records.
PerformanceMatrix build_matrix(const std::vector<std::filesystem::path>& run_dirs,
                               const std::vector<std::shared_ptr<const Objective>>& objectives,
                               const std::vector<std::string>& dataset_ids, double b_max, int workers = 1,
                               std::uint64_t seed = 0);

/// matrix.csv: header "candidate,<dataset ids...>", one row of accuracies per candidate.
void write_performance_csv(const std::filesystem::path& file, const PerformanceMatrix& matrix);
/// Reads matrix.csv back; candidate configurations are not stored there and stay empty.
PerformanceMatrix read_performance_csv(const std::filesystem::path& file);

}  // namespace multifid
