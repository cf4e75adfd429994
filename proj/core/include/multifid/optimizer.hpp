#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/executor.hpp"
#include "multifid/kde.hpp"
#include "multifid/run_history.hpp"

namespace multifid {

/// Geometric budget schedule: rungs[k] ~ b_max / eta^(K-k), rounded to whole epochs
/// (half-to-even) with b_max pinned exactly.
struct BudgetLadder {
  double b_min = 1.0;
  double b_max = 1.0;
  double eta = 3.0;
  std::vector<double> rungs;

  std::size_t s_max() const { return rungs.size() - 1; }
  json to_json() const;
};

/// Throws std::invalid_argument unless 0 < b_min <= b_max and eta > 1.
BudgetLadder budget_ladder(double b_min, double b_max, double eta);

/// One SuccessiveHalving run inside the Hyperband outer loop.
struct Bracket {
  int index = 0;
  std::vector<std::size_t> rung_sizes;
  std::vector<double> rung_budgets;
};

/// Hyperband schedule for bracket s: starts at rungs[s_max - s] with
/// n = ceil((s_max + 1) / (s + 1) * eta^s) configurations (at least `min_initial`),
/// then floor(n / eta^j) (minimum 1) on each following rung.
Bracket bracket_plan(const BudgetLadder& ladder, int s, std::size_t min_initial = 0);

struct RungEntry {
  std::uint64_t config_id = 0;
  double loss = 0.0;
  bool crashed = false;
};

/// The max(1, floor(n / eta)) best entries (crashed entries rank last), best first; ties
/// keep submission order. Throws on an empty rung.
std::vector<std::uint64_t> sh_promote(std::span<const RungEntry> rung, double eta);

struct RunLimits {
  int max_iterations = 10;  // one iteration = one SuccessiveHalving bracket
  double wall_clock_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Chooses where the next new configuration comes from: the warmstart portfolio first,
/// then random with probability random_fraction, then the KDE of the highest budget
/// with at least d + 2 records, and random otherwise.
class BohbSampler {
 public:
  struct Sample {
    Configuration config;
    Origin origin = Origin::random;
  };

  BohbSampler(std::shared_ptr<const ConfigurationSpace> space, KdeSettings settings,
              std::vector<Configuration> portfolio = {});

  Sample next_sample(const RunHistory& history, double budget, Rng& rng, bool portfolio_allowed = true);
  /// Budget whose model would be used now, if any.
  std::optional<double> model_budget(const RunHistory& history) const;
  std::size_t portfolio_remaining() const { return portfolio_.size() - portfolio_pos_; }
  std::size_t min_points_for_model() const { return space_->dimension() + 2; }

 private:
  const KdeModel& model_for(const RunHistory& history, double budget);

  std::shared_ptr<const ConfigurationSpace> space_;
  KdeSettings settings_;
  std::vector<Configuration> portfolio_;
  std::size_t portfolio_pos_ = 0;
  std::vector<DimensionInfo> dims_;
  struct CachedModel {
    std::size_t n_records = 0;
    std::optional<KdeModel> model;
  };
  std::map<double, CachedModel> cache_;
};

struct RunOptions {
  RunLimits limits;
  KdeSettings kde;
  /// Warmstart configurations; they fill the lowest rung of the first bracket, which is
  /// enlarged to hold all of them.
  std::vector<Configuration> portfolio;
  /// Records of an interrupted run (sequential mode). They are replayed in order
  /// instead of being evaluated again; the run then continues deterministically.
  std::vector<EvaluationRecord> resume;
  /// Called on the master thread for every completed evaluation.
  std::function<void(const EvaluationRecord&, const JobResult&)> on_record;
};

class ResumeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// BOHB: Hyperband brackets s = s_max..0 (cycling) with model-based sampling, until
/// max_iterations brackets ran or the wall clock expired. Objective crashes are recorded
/// with kCrashLoss and never abort the run.
RunHistory run(std::shared_ptr<const ConfigurationSpace> space, std::shared_ptr<const Objective> objective,
               const BudgetLadder& ladder, const RunOptions& options);

/// Uniform random configurations evaluated at one budget until `max_evaluations`
/// evaluations or `max_total_budget` summed budget is reached.
RunHistory run_random_search(std::shared_ptr<const ConfigurationSpace> space,
                             std::shared_ptr<const Objective> objective, double budget, std::size_t max_evaluations,
                             std::uint64_t seed,
                             double max_total_budget = std::numeric_limits<double>::infinity());

}  // namespace multifid
