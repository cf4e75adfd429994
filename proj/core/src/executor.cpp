#include "multifid/executor.hpp"

#include <chrono>
#include <cmath>

namespace multifid {

JobResult evaluate(const Objective& objective, const Job& job) {
  const auto start = std::chrono::steady_clock::now();
  JobResult result;
  try {
    result = objective.evaluate(job);
  } catch (const WorkerDeath&) {
    throw;
  } catch (const std::exception&) {
    result = JobResult{};
    result.status = JobStatus::crashed;
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  result.job_id = job.job_id;
  if (result.status == JobStatus::ok && !std::isfinite(result.loss)) result.status = JobStatus::crashed;
  if (result.status == JobStatus::crashed) {
    result.loss = kCrashLoss;
    result.predictions.reset();
  }
  return result;
}

WorkerPool::WorkerPool(std::shared_ptr<const Objective> objective, int n_workers) : objective_(std::move(objective)) {
  if (n_workers < 1) throw std::invalid_argument("worker count must be at least 1");
  live_ = static_cast<std::size_t>(n_workers);
  threads_.reserve(live_);
  for (int i = 0; i < n_workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() { shutdown(); }

void WorkerPool::submit(Job job) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) throw std::logic_error("submit after shutdown");
    ++in_flight_;
    if (live_ == 0) {
      JobResult r;
      r.job_id = job.job_id;
      r.loss = kCrashLoss;
      results_.push_back(std::move(r));
      result_cv_.notify_one();
      return;
    }
    queue_.push_back(std::move(job));
  }
  job_cv_.notify_one();
}

JobResult WorkerPool::next_result() {
  std::unique_lock lock(mu_);
  if (in_flight_ == 0) throw std::logic_error("next_result with nothing in flight");
  result_cv_.wait(lock, [this] { return !results_.empty(); });
  JobResult r = std::move(results_.front());
  results_.pop_front();
  --in_flight_;
  return r;
}

std::size_t WorkerPool::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

std::size_t WorkerPool::live_workers() const {
  std::lock_guard lock(mu_);
  return live_;
}

std::size_t WorkerPool::idle_workers() const {
  std::lock_guard lock(mu_);
  const std::size_t claimed = busy_ + queue_.size();
  return live_ > claimed ? live_ - claimed : 0;
}

std::size_t WorkerPool::requeued_jobs() const {
  std::lock_guard lock(mu_);
  return requeued_;
}

void WorkerPool::drain_queue_as_crashed_locked() {
  while (!queue_.empty()) {
    JobResult r;
    r.job_id = queue_.front().job_id;
    r.loss = kCrashLoss;
    results_.push_back(std::move(r));
    queue_.pop_front();
  }
  result_cv_.notify_all();
}

void WorkerPool::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mu_);
      job_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;  // stopping
      job = std::move(queue_.front());
      queue_.pop_front();
      ++busy_;
    }
    try {
      JobResult r = evaluate(*objective_, job);
      std::lock_guard lock(mu_);
      --busy_;
      results_.push_back(std::move(r));
      result_cv_.notify_one();
    } catch (const WorkerDeath&) {
      std::lock_guard lock(mu_);
      --busy_;
      --live_;
      if (deaths_[job.job_id]++ == 0 && live_ > 0 && !stopping_) {
        ++requeued_;
        queue_.push_front(std::move(job));
        job_cv_.notify_one();
      } else {
        JobResult r;
        r.job_id = job.job_id;
        r.loss = kCrashLoss;
        results_.push_back(std::move(r));
        result_cv_.notify_one();
      }
      if (live_ == 0) drain_queue_as_crashed_locked();
      return;
    }
  }
}

void WorkerPool::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && threads_.empty()) return;
    stopping_ = true;
    drain_queue_as_crashed_locked();
  }
  job_cv_.notify_all();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
}

std::vector<JobResult> serve(std::shared_ptr<const Objective> objective, const std::vector<Job>& jobs, int n_workers) {
  WorkerPool pool(std::move(objective), n_workers);
  for (const auto& job : jobs) pool.submit(job);
  std::vector<JobResult> out;
  out.reserve(jobs.size());
  while (pool.in_flight() > 0) out.push_back(pool.next_result());
  return out;
}

}  // namespace multifid
