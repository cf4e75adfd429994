#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/matrix.hpp"

namespace multifid {

struct Job {
  std::uint64_t job_id = 0;
  Configuration configuration;
  double budget = 0.0;
  std::uint64_t seed = 0;
};

enum class JobStatus { ok, crashed };

struct JobResult {
  std::uint64_t job_id = 0;
  double loss = 1.0;
  std::optional<std::vector<double>> learning_curve;  // per-epoch losses
  std::optional<Matrix> predictions;                  // validation instances x classes
  double wall_time = 0.0;
  JobStatus status = JobStatus::crashed;
};

/// Loss assigned to crashed evaluations (the worst value of an accuracy-derived loss).
inline constexpr double kCrashLoss = 1.0;

/// The evaluation contract. Implementations must be deterministic in
/// (configuration, budget, seed) and safe to call from several threads.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual JobResult evaluate(const Job& job) const = 0;
  virtual std::string describe() const = 0;
  /// True class labels of the validation split when results carry predictions.
  virtual std::optional<std::vector<int>> validation_labels() const { return std::nullopt; }
};

/// Thrown by an objective to simulate the worker running it dying mid-job. It escapes
/// `evaluate()` so that the pool can observe the death.
class WorkerDeath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the objective and normalizes failures: exceptions and non-finite losses become
/// status=crashed with kCrashLoss. WorkerDeath is rethrown.
JobResult evaluate(const Objective& objective, const Job& job);

/// Master-side handle on a pool of in-process workers. Jobs go into a shared queue;
/// results come back in completion order. A worker that dies gets its job re-queued
/// once; a second death marks the job crashed.
class WorkerPool {
 public:
  WorkerPool(std::shared_ptr<const Objective> objective, int n_workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(Job job);
  /// Blocks until any result is available. Precondition: in_flight() > 0.
  JobResult next_result();
  std::size_t in_flight() const;
  std::size_t live_workers() const;
  std::size_t idle_workers() const;
  /// Number of jobs that were re-queued after a worker death.
  std::size_t requeued_jobs() const;
  /// Stops accepting work. Running jobs complete; queued jobs come back as crashed.
  void shutdown();

 private:
  void worker_loop();
  void drain_queue_as_crashed_locked();

  std::shared_ptr<const Objective> objective_;
  mutable std::mutex mu_;
  std::condition_variable job_cv_;
  std::condition_variable result_cv_;
  std::deque<Job> queue_;
  std::deque<JobResult> results_;
  std::map<std::uint64_t, int> deaths_;
  std::size_t in_flight_ = 0;
  std::size_t live_ = 0;
  std::size_t busy_ = 0;
  std::size_t requeued_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

/// Evaluates all jobs on `n_workers` workers and returns the results in completion
/// order. With one worker the order equals dispatch order.
std::vector<JobResult> serve(std::shared_ptr<const Objective> objective, const std::vector<Job>& jobs, int n_workers);

}  // namespace multifid
