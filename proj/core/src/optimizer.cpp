#include "multifid/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace multifid {

json BudgetLadder::to_json() const {
  return {{"b_min", b_min}, {"b_max", b_max}, {"eta", eta}, {"rungs", rungs}};
}

BudgetLadder budget_ladder(double b_min, double b_max, double eta) {
  if (!(b_min > 0.0) || !(b_max >= b_min) || !std::isfinite(b_max))
    throw std::invalid_argument("budget ladder needs 0 < b_min <= b_max");
  if (!(eta > 1.0) || !std::isfinite(eta)) throw std::invalid_argument("budget ladder needs eta > 1");
  BudgetLadder ladder{b_min, b_max, eta, {}};
  const int k_max = static_cast<int>(std::floor(std::log(b_max / b_min) / std::log(eta) + 1e-9));
  for (int k = k_max; k >= 0; --k) {
    double b = k == 0 ? b_max : std::nearbyint(b_max / std::pow(eta, k));
    b = std::max(b, 1.0);
    if (ladder.rungs.empty() || b > ladder.rungs.back()) ladder.rungs.push_back(b);
  }
  return ladder;
}

Bracket bracket_plan(const BudgetLadder& ladder, int s, std::size_t min_initial) {
  const int s_max = static_cast<int>(ladder.s_max());
  if (s < 0 || s > s_max)
    throw std::out_of_range("bracket index " + std::to_string(s) + " outside [0, " + std::to_string(s_max) + "]");
  Bracket b;
  b.index = s;
  const double n_real = static_cast<double>(s_max + 1) / static_cast<double>(s + 1) * std::pow(ladder.eta, s);
  auto n = static_cast<std::size_t>(std::ceil(n_real - 1e-9));
  n = std::max({n, min_initial, std::size_t{1}});
  for (int j = 0; j <= s; ++j) {
    const auto size = static_cast<std::size_t>(std::floor(static_cast<double>(n) / std::pow(ladder.eta, j) + 1e-9));
    b.rung_sizes.push_back(std::max<std::size_t>(size, 1));
    b.rung_budgets.push_back(ladder.rungs[static_cast<std::size_t>(s_max - s + j)]);
  }
  return b;
}

std::vector<std::uint64_t> sh_promote(std::span<const RungEntry> rung, double eta) {
  if (rung.empty()) throw std::invalid_argument("cannot promote from an empty rung");
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(rung.size()) / eta + 1e-9)));
  std::vector<std::size_t> order(rung.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rung[a].crashed != rung[b].crashed) return !rung[a].crashed;
    return rung[a].loss < rung[b].loss;
  });
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(rung[order[i]].config_id);
  return out;
}

// ---------------------------------------------------------------------------

BohbSampler::BohbSampler(std::shared_ptr<const ConfigurationSpace> space, KdeSettings settings,
                         std::vector<Configuration> portfolio)
    : space_(std::move(space)), settings_(settings), portfolio_(std::move(portfolio)), dims_(space_->dimension_kinds()) {
  for (const auto& c : portfolio_) space_->validate(c);
}

std::optional<double> BohbSampler::model_budget(const RunHistory& history) const {
  std::map<double, std::size_t> counts;
  for (const auto& r : history.records()) ++counts[r.budget];
  for (auto it = counts.rbegin(); it != counts.rend(); ++it)
    if (it->second >= min_points_for_model()) return it->first;
  return std::nullopt;
}

const KdeModel& BohbSampler::model_for(const RunHistory& history, double budget) {
  auto& cached = cache_[budget];
  const auto indices = history.indices_at(budget);
  if (!cached.model || cached.n_records != indices.size()) {
    std::vector<Observation> obs;
    obs.reserve(indices.size());
    for (auto i : indices) {
      const auto& r = history.records()[i];
      obs.push_back({space_->to_unit_cube(r.configuration), r.loss});
    }
    cached.model = fit_tpe(obs, dims_, budget, settings_);
    cached.n_records = indices.size();
  }
  return *cached.model;
}

BohbSampler::Sample BohbSampler::next_sample(const RunHistory& history, double /*budget*/, Rng& rng,
                                             bool portfolio_allowed) {
  if (portfolio_allowed && portfolio_pos_ < portfolio_.size()) return {portfolio_[portfolio_pos_++], Origin::portfolio};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < settings_.random_fraction) return {space_->sample_uniform(rng), Origin::random};
  if (auto b = model_budget(history)) {
    const auto& model = model_for(history, *b);
    const auto vec = propose(model, settings_.n_samples, settings_.bandwidth_factor, rng);
    return {space_->from_unit_cube(vec), Origin::model};
  }
  return {space_->sample_uniform(rng), Origin::random};
}

// ---------------------------------------------------------------------------

namespace {

struct Slot {
  std::uint64_t config_id = 0;
  Configuration config;
  Origin origin = Origin::random;
};

class RunClock {
 public:
  explicit RunClock(bool simulated) : simulated_(simulated), start_(std::chrono::steady_clock::now()) {}
  double elapsed_real() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  // Sequential runs stamp records with accumulated reported evaluation time so that
  // outputs are reproducible; parallel runs use real elapsed time.
  double stamp(double wall_time) {
    simulated_total_ += wall_time;
    return simulated_ ? simulated_total_ : elapsed_real();
  }

 private:
  bool simulated_;
  std::chrono::steady_clock::time_point start_;
  double simulated_total_ = 0.0;
};

}  // namespace

RunHistory run(std::shared_ptr<const ConfigurationSpace> space, std::shared_ptr<const Objective> objective,
               const BudgetLadder& ladder, const RunOptions& options) {
  const auto& limits = options.limits;
  if (limits.workers < 1) throw std::invalid_argument("workers must be at least 1");
  RunHistory history(ladder.b_max);
  Rng rng(limits.seed);
  BohbSampler sampler(space, options.kde, options.portfolio);
  const bool parallel = limits.workers > 1;
  std::unique_ptr<WorkerPool> pool;
  if (parallel) pool = std::make_unique<WorkerPool>(objective, limits.workers);
  RunClock clock(!parallel);

  std::uint64_t next_config_id = 0;
  std::uint64_t next_job_id = 0;
  std::size_t resume_pos = 0;
  const int s_max = static_cast<int>(ladder.s_max());
  bool stopped = false;

  auto time_exceeded = [&] { return clock.elapsed_real() >= limits.wall_clock_seconds; };

  for (int iter = 0; iter < limits.max_iterations && !stopped; ++iter) {
    if (time_exceeded()) break;
    const int s = s_max - iter % (s_max + 1);
    const bool first = iter == 0;
    const auto plan = bracket_plan(ladder, s, first ? options.portfolio.size() : 0);

    std::vector<Slot> slots;
    for (std::size_t r = 0; r < plan.rung_budgets.size() && !stopped; ++r) {
      const double budget = plan.rung_budgets[r];
      const std::size_t n_slots = r == 0 ? plan.rung_sizes[0] : slots.size();
      std::vector<std::optional<RungEntry>> entries(n_slots);
      std::map<std::uint64_t, std::size_t> job_slot;
      std::size_t dispatched = 0;
      std::size_t outstanding = 0;

      auto record = [&](std::size_t slot_index, const Job& job, const JobResult& result) {
        const auto& slot = slots[slot_index];
        EvaluationRecord rec;
        rec.config_id = slot.config_id;
        rec.configuration = slot.config;
        rec.budget = budget;
        rec.seed = job.seed;
        rec.crashed = result.status == JobStatus::crashed;
        rec.loss = rec.crashed ? kCrashLoss : result.loss;
        rec.learning_curve = result.learning_curve;
        rec.wall_time = result.wall_time;
        rec.timestamp = clock.stamp(result.wall_time);
        rec.origin = slot.origin;
        rec.bracket = iter;
        rec.rung = static_cast<int>(r);
        entries[slot_index] = RungEntry{slot.config_id, rec.loss, rec.crashed};
        if (options.on_record) options.on_record(rec, result);
        history.append(std::move(rec));
      };

      std::map<std::uint64_t, Job> pending_jobs;
      while (dispatched < n_slots || outstanding > 0) {
        while (dispatched < n_slots && !stopped && (!parallel || outstanding < pool->live_workers())) {
          if (time_exceeded()) {
            stopped = true;
            break;
          }
          if (r == 0) {
            auto sample = sampler.next_sample(history, budget, rng, first);
            slots.push_back({next_config_id++, std::move(sample.config), sample.origin});
          }
          const std::size_t slot_index = dispatched++;
          Job job{next_job_id++, slots[slot_index].config, budget, limits.seed};

          if (resume_pos < options.resume.size()) {
            const auto& old = options.resume[resume_pos];
            if (old.config_id != slots[slot_index].config_id || old.budget != budget ||
                !(old.configuration == slots[slot_index].config))
              throw ResumeMismatch("resumed history diverges at record " + std::to_string(resume_pos));
            JobResult replayed;
            replayed.job_id = job.job_id;
            replayed.loss = old.loss;
            replayed.status = old.crashed ? JobStatus::crashed : JobStatus::ok;
            replayed.learning_curve = old.learning_curve;
            replayed.wall_time = old.wall_time;
            ++resume_pos;
            record(slot_index, job, replayed);
          } else if (!parallel) {
            record(slot_index, job, evaluate(*objective, job));
          } else {
            job_slot[job.job_id] = slot_index;
            pending_jobs.emplace(job.job_id, job);
            pool->submit(job);
            ++outstanding;
          }
        }
        if (outstanding > 0) {
          JobResult result = pool->next_result();
          --outstanding;
          const auto slot_index = job_slot.at(result.job_id);
          record(slot_index, pending_jobs.at(result.job_id), result);
          pending_jobs.erase(result.job_id);
        } else if (stopped) {
          break;
        }
      }
      if (stopped) break;

      if (r + 1 < plan.rung_budgets.size()) {
        std::vector<RungEntry> rung;
        for (const auto& e : entries)
          if (e) rung.push_back(*e);
        const auto promoted = sh_promote(rung, ladder.eta);
        std::vector<Slot> next;
        for (auto id : promoted)
          for (const auto& slot : slots)
            if (slot.config_id == id) next.push_back(slot);
        slots = std::move(next);
      }
    }
  }
  if (pool) pool->shutdown();
  return history;
}

RunHistory run_random_search(std::shared_ptr<const ConfigurationSpace> space,
                             std::shared_ptr<const Objective> objective, double budget, std::size_t max_evaluations,
                             std::uint64_t seed, double max_total_budget) {
  RunHistory history(budget);
  Rng rng(seed);
  double spent = 0.0;
  double clock = 0.0;
  for (std::size_t i = 0; i < max_evaluations && spent + budget <= max_total_budget + 1e-9; ++i) {
    Job job{i, space->sample_uniform(rng), budget, seed};
    const JobResult result = evaluate(*objective, job);
    EvaluationRecord rec;
    rec.config_id = i;
    rec.configuration = job.configuration;
    rec.budget = budget;
    rec.seed = seed;
    rec.crashed = result.status == JobStatus::crashed;
    rec.loss = result.loss;
    rec.wall_time = result.wall_time;
    clock += result.wall_time;
    rec.timestamp = clock;
    rec.origin = Origin::random;
    history.append(std::move(rec));
    spent += budget;
  }
  return history;
}

}  // namespace multifid
