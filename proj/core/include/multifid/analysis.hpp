#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/forest.hpp"
#include "multifid/matrix.hpp"
#include "multifid/replay.hpp"
#include "multifid/run_history.hpp"

namespace multifid {

class SyntheticCurveObjective;

/// Pearson correlation of average ranks. nullopt when either input is constant.
/// Throws std::invalid_argument for unequal lengths or fewer than two points.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Fractional ranks starting at 1; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

enum class ScheduleMode { non_adaptive, adaptive, cross };

std::string to_string(ScheduleMode m);
ScheduleMode schedule_mode_from_string(const std::string& s);

struct CorrelationReport {
  int budget_a = 0;
  int budget_b = 0;
  ScheduleMode mode = ScheduleMode::non_adaptive;
  std::vector<std::string> datasets;
  std::vector<std::optional<double>> rho;  // nullopt where undefined
  std::size_t n_configs = 0;               // smallest per-dataset overlap
  double mean = 0.0;                       // over defined coefficients
  double stddev = 0.0;                     // sample standard deviation, 0 for one dataset

  json to_json() const;
};

/// Minimum shared configurations for a correlation.
inline constexpr std::size_t kMinCorrelationConfigs = 10;

/// Per-dataset coefficients from paired scores. Throws std::invalid_argument when a
/// dataset has fewer than kMinCorrelationConfigs pairs.
CorrelationReport correlation_report(const std::vector<std::string>& datasets,
                                     const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                     int budget_a, int budget_b, ScheduleMode mode);

/// non_adaptive reads one curve at epochs a and b; adaptive compares the endpoints of
/// the schedules annealed to a and to b; cross compares adaptive at a with
/// non-adaptive at b. The b_max adaptive curve falls back to the regular curve.
CorrelationReport budget_correlation(const std::vector<ReplayBundle>& bundles, int budget_a, int budget_b,
                                     ScheduleMode mode);

/// Configurations evaluated at both budgets in one run.
CorrelationReport budget_correlation(const RunHistory& history, const std::string& dataset, int budget_a,
                                     int budget_b);

/// Noise-free correlation on n random configurations of a synthetic objective.
CorrelationReport budget_correlation(const SyntheticCurveObjective& objective, std::size_t n_configs, int budget_a,
                                     int budget_b, ScheduleMode mode, int horizon, std::uint64_t seed);

void write_correlation_csv(const std::filesystem::path& file, const std::vector<CorrelationReport>& reports);

/// Feature vector in [0,1]^d for forest analysis: numeric dimensions use the unit-cube
/// encoding; categorical index i of L levels (including inactive) maps to (i + 0.5) / L.
std::vector<double> analysis_features(const ConfigurationSpace& space, const Configuration& config);
/// Inverse of analysis_features followed by from_unit_cube.
Configuration configuration_from_features(const ConfigurationSpace& space, std::span<const double> features);

struct ImportanceReport {
  std::string method;  // "fanova" or "lpi"
  std::string dataset;
  double budget = 0.0;
  std::vector<std::string> names;
  std::vector<double> scores;
  bool degenerate = false;

  json to_json() const;
};

/// Mean over trees of V_j / V, with V_j the variance of the marginal of dimension j.
/// Trees with zero variance contribute zeros.
ImportanceReport fanova_first_order(const ForestSurrogate& forest, const std::vector<std::string>& names);

using Evaluable = std::function<double(std::span<const double>)>;

/// grids[j] lists the coordinates visited along dimension j; an empty grid marks an
/// inactive dimension (score 0). Others stay at `incumbent`.
ImportanceReport lpi_grid(const Evaluable& f, const std::vector<double>& incumbent,
                          const std::vector<std::vector<double>>& grids, const std::vector<std::string>& names);

/// LPI in analysis-feature space: grid_size evenly spaced points for numeric
/// hyperparameters, every level for categoricals, nothing for inactive ones.
ImportanceReport lpi(const ConfigurationSpace& space, const Evaluable& f, const Configuration& incumbent,
                     std::size_t grid_size = 21);

void write_importance_csv(const std::filesystem::path& file, const std::vector<ImportanceReport>& reports);

struct Heatmap {
  std::vector<std::string> row_ids;  // accuracy matrix order
  std::vector<std::string> col_ids;
  Matrix accuracy;
  std::vector<std::string> regret_row_ids;
  std::vector<std::string> regret_col_ids;
  Matrix regret;
  /// Distinct configurations that are best on at least one dataset.
  std::size_t unique_best = 0;
};

/// Rows and columns of the accuracy matrix sorted by descending mean, the regret matrix
/// by ascending mean (stable). Only configurations present in every dataset count.
Heatmap performance_heatmap(const std::vector<std::string>& row_ids, const std::vector<std::string>& col_ids,
                            const Matrix& accuracy);
Heatmap performance_heatmap(const std::vector<ReplayBundle>& bundles);

void write_heatmap_csv(const std::filesystem::path& file, const std::vector<std::string>& rows,
                       const std::vector<std::string>& cols, const Matrix& m);
/// Single-file grayscale SVG; a generation timestamp comment is added unless
/// `reproducible`.
void write_heatmap_svg(const std::filesystem::path& file, const std::vector<std::string>& rows,
                       const std::vector<std::string>& cols, const Matrix& m, const std::string& title,
                       bool reproducible);

}  // namespace multifid
