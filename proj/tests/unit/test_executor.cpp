#include <doctest.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <multifid/executor.hpp>
#include <multifid/objectives.hpp>
#include <multifid/socket_objective.hpp>

#include "support.hpp"

using namespace multifid;

namespace {

// Counts calls per job; the job with id `victim` kills its worker on the first attempt.
class CountingObjective : public Objective {
 public:
  explicit CountingObjective(std::optional<std::uint64_t> victim = std::nullopt, int deaths = 1)
      : victim_(victim), deaths_(deaths) {}

  JobResult evaluate(const Job& job) const override {
    {
      std::lock_guard lock(mu_);
      const int n = ++calls_[job.job_id];
      if (victim_ && job.job_id == *victim_ && n <= deaths_) throw WorkerDeath("worker killed");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    JobResult r;
    r.loss = job.budget / 100.0;
    r.status = JobStatus::ok;
    return r;
  }
  std::string describe() const override { return "counting"; }

  std::map<std::uint64_t, int> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  std::optional<std::uint64_t> victim_;
  int deaths_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, int> calls_;
};

std::vector<Job> make_jobs(std::size_t n) {
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < n; ++i) jobs.push_back(Job{i, Configuration{}, static_cast<double>(i + 1), 0});
  return jobs;
}

class ThrowingObjective : public Objective {
 public:
  JobResult evaluate(const Job&) const override { throw std::runtime_error("diverged"); }
  std::string describe() const override { return "throwing"; }
};

class NanObjective : public Objective {
 public:
  JobResult evaluate(const Job&) const override {
    JobResult r;
    r.loss = std::nan("");
    r.status = JobStatus::ok;
    return r;
  }
  std::string describe() const override { return "nan"; }
};

}  // namespace

TEST_SUITE("executor") {
  TEST_CASE("evaluate normalizes failures") {
    const Job job{3, Configuration{}, 12, 0};
    const auto a = evaluate(ThrowingObjective{}, job);
    CHECK(a.status == JobStatus::crashed);
    CHECK(a.loss == kCrashLoss);
    CHECK(a.job_id == 3);
    const auto b = evaluate(NanObjective{}, job);
    CHECK(b.status == JobStatus::crashed);
    CHECK(b.loss == kCrashLoss);
  }

  TEST_CASE("one worker returns results in dispatch order") {
    auto obj = std::make_shared<CountingObjective>();
    const auto results = serve(obj, make_jobs(20), 1);
    REQUIRE(results.size() == 20);
    for (std::size_t i = 0; i < results.size(); ++i) {
      CHECK(results[i].job_id == i);
      CHECK(results[i].status == JobStatus::ok);
    }
  }

  TEST_CASE("three workers complete every job exactly once") {
    auto obj = std::make_shared<CountingObjective>();
    const auto results = serve(obj, make_jobs(30), 3);
    std::set<std::uint64_t> ids;
    for (const auto& r : results) {
      ids.insert(r.job_id);
      CHECK(r.loss == doctest::Approx((static_cast<double>(r.job_id) + 1) / 100.0));
    }
    CHECK(ids.size() == 30);
    for (const auto& [id, n] : obj->calls()) CHECK(n == 1);
  }

  TEST_CASE("a killed worker's job is re-executed exactly once") {
    auto obj = std::make_shared<CountingObjective>(7);
    WorkerPool pool(obj, 3);
    for (auto& j : make_jobs(30)) pool.submit(j);
    std::vector<JobResult> results;
    while (pool.in_flight() > 0) results.push_back(pool.next_result());
    REQUIRE(results.size() == 30);
    for (const auto& r : results) CHECK(r.status == JobStatus::ok);
    CHECK(pool.requeued_jobs() == 1);
    CHECK(pool.live_workers() == 2);
    const auto calls = obj->calls();
    for (const auto& [id, n] : calls) CHECK(n == (id == 7 ? 2 : 1));
  }

  TEST_CASE("a job that kills two workers is marked crashed") {
    auto obj = std::make_shared<CountingObjective>(4, 2);
    const auto results = serve(obj, make_jobs(10), 3);
    REQUIRE(results.size() == 10);
    for (const auto& r : results) {
      if (r.job_id == 4) {
        CHECK(r.status == JobStatus::crashed);
        CHECK(r.loss == kCrashLoss);
      } else {
        CHECK(r.status == JobStatus::ok);
      }
    }
  }

  TEST_CASE("shutdown returns queued jobs as crashed") {
    auto obj = std::make_shared<SleepObjective>(std::chrono::milliseconds(30));
    WorkerPool pool(obj, 1);
    for (auto& j : make_jobs(5)) pool.submit(j);
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    pool.shutdown();
    std::size_t ok = 0, crashed = 0;
    while (pool.in_flight() > 0) {
      const auto r = pool.next_result();
      (r.status == JobStatus::ok ? ok : crashed)++;
    }
    CHECK(ok + crashed == 5);
    CHECK(ok >= 1);
    CHECK(crashed >= 1);
    CHECK_THROWS_AS(pool.submit(Job{}), std::logic_error);
  }

  TEST_CASE("three sleeping workers scale") {
    auto obj = std::make_shared<SleepObjective>(std::chrono::milliseconds(20));
    const auto jobs = make_jobs(30);
    auto timed = [&](int workers) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = serve(obj, jobs, workers);
      CHECK(r.size() == jobs.size());
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double seq = timed(1);
    const double par = timed(3);
    CHECK(par <= 0.45 * seq);
  }

  TEST_CASE("wire format round trip") {
    const auto s1 = testing::space("space1.json");
    Rng rng(3);
    Job job{11, s1->sample_uniform(rng), 25, 9};
    const auto back = job_from_wire(json::parse(job_to_wire(job).dump()), *s1);
    CHECK(back.job_id == 11);
    CHECK(back.budget == 25);
    CHECK(back.seed == 9);
    CHECK(back.configuration == job.configuration);

    JobResult r;
    r.job_id = 11;
    r.loss = 0.123456789012345;
    r.status = JobStatus::ok;
    r.learning_curve = std::vector<double>{0.5, 0.4};
    const auto rb = result_from_wire(json::parse(result_to_wire(r).dump()));
    CHECK(rb.loss == r.loss);
    CHECK(rb.status == JobStatus::ok);
    CHECK(rb.learning_curve == r.learning_curve);
  }

  TEST_CASE("socket workers answer like the wrapped objective") {
    const auto s1 = testing::space("space1.json");
    auto inner = std::make_shared<SyntheticCurveObjective>(s1, SyntheticCurveParams::standard(s1->dimension()));
    SocketWorkerServer server(inner, s1, 0);
    server.start();
    REQUIRE(server.port() > 0);
    auto client = SocketObjective::from_address("127.0.0.1:" + std::to_string(server.port()));
    Rng rng(4);
    for (int i = 0; i < 5; ++i) {
      Job job{static_cast<std::uint64_t>(i), s1->sample_uniform(rng), 25, 1};
      const auto remote = evaluate(*client, job);
      const auto local = evaluate(*inner, job);
      CHECK(remote.status == JobStatus::ok);
      CHECK(remote.loss == local.loss);
      CHECK(remote.job_id == job.job_id);
    }
    server.stop();
    Job job{99, s1->sample_uniform(rng), 25, 1};
    CHECK(evaluate(*client, job).status == JobStatus::crashed);
  }
}
