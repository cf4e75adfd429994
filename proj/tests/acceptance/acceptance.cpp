// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <multifid/analysis.hpp>
#include <multifid/ensemble.hpp>
#include <multifid/forest.hpp>
#include <multifid/objectives.hpp>
#include <multifid/optimizer.hpp>
#include <multifid/portfolio.hpp>
#include <multifid/replay.hpp>
#include <multifid/run_io.hpp>
#include <multifid/shaped_arch.hpp>
#include <multifid_cli/cli.hpp>

#include "support.hpp"

using namespace multifid;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

using Criterion = std::function<void(Verdict&)>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------------------
// 1. Budget ladder

void budget_ladder_criterion(Verdict& v) {
  const auto ladder = budget_ladder(12, 50, 2);
  v.require(ladder.rungs == std::vector<double>{12, 25, 50}, "ladder (12, 50, 2)");
  v.detail << "rungs=" << ladder.to_json()["rungs"].dump();
}

// ---------------------------------------------------------------------------------------
// 2. Funnel widths

void funnel_criterion(Verdict& v) {
  v.require(funnel_widths({100, 4, 10}) == std::vector<std::int64_t>{100, 70, 40, 10}, "(100, 4, 10)");
  Rng rng(2);
  std::uniform_int_distribution<std::int64_t> out_w(1, 600), layers(1, 12), extra(0, 1500);
  std::size_t checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const FunnelShape s{0, layers(rng), out_w(rng)};
    const FunnelShape shape{s.n_out + extra(rng), s.n_layers, s.n_out};
    const auto w = funnel_widths(shape);
    bool ok = w.size() == static_cast<std::size_t>(shape.n_layers) && w.front() == shape.n_max;
    if (shape.n_layers >= 2) ok = ok && w.back() == shape.n_out;
    for (std::size_t k = 1; k < w.size(); ++k) ok = ok && w[k] <= w[k - 1];
    v.require(ok, "random shape " + std::to_string(i));
    ++checked;
  }
  v.detail << "example ok, " << checked << " random shapes checked";
}

// ---------------------------------------------------------------------------------------
// 3. SuccessiveHalving / Hyperband schedule

std::vector<std::size_t> hyperband_oracle(std::size_t s_max, std::size_t s, double eta) {
  const double n = std::ceil(static_cast<double>(s_max + 1) / static_cast<double>(s + 1) * std::pow(eta, s));
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j <= s; ++j)
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(n / std::pow(eta, j)))));
  return out;
}

bool no_budget_skipping(const RunHistory& h, const BudgetLadder& ladder) {
  std::map<int, std::map<int, std::vector<const EvaluationRecord*>>> by;
  for (const auto& r : h.records()) by[r.bracket][r.rung].push_back(&r);
  const int s_max = static_cast<int>(ladder.s_max());
  for (const auto& [b, rungs] : by) {
    const auto plan = bracket_plan(ladder, s_max - b % (s_max + 1));
    for (const auto& [r, recs] : rungs) {
      const auto ri = static_cast<std::size_t>(r);
      if (recs.size() != plan.rung_sizes[ri]) return false;
      for (const auto* rec : recs)
        if (rec->budget != plan.rung_budgets[ri]) return false;
      if (r == 0) continue;
      const auto& prev = rungs.at(r - 1);
      const auto floor_n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(prev.size() / ladder.eta)));
      if (recs.size() != floor_n) return false;
      std::set<std::uint64_t> ids;
      for (const auto* p : prev) ids.insert(p->config_id);
      for (const auto* rec : recs)
        if (!ids.count(rec->config_id)) return false;
    }
  }
  return true;
}

void schedule_criterion(Verdict& v) {
  const auto ladder = budget_ladder(12, 50, 2);
  const std::vector<std::vector<std::size_t>> expected{{3}, {3, 1}, {4, 2, 1}};
  for (int s = 0; s <= 2; ++s) {
    const auto plan = bracket_plan(ladder, s);
    v.require(plan.rung_sizes == expected[static_cast<std::size_t>(s)], "bracket s=" + std::to_string(s));
    v.require(plan.rung_sizes == hyperband_oracle(2, static_cast<std::size_t>(s), 2.0), "oracle s=" + std::to_string(s));
  }

  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n_entries(1, 30);
  for (int t = 0; t < 500; ++t) {
    const double eta = t % 2 ? 2.0 : 3.0;
    std::vector<RungEntry> rung;
    const int n = n_entries(rng);
    for (int i = 0; i < n; ++i)
      rung.push_back({static_cast<std::uint64_t>(i), std::round(u(rng) * 10) / 10, u(rng) < 0.1});
    const auto promoted = sh_promote(rung, eta);
    v.require(promoted.size() == std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(n / eta))),
              "promotion count");
    // Oracle: stable sort by (crashed, loss).
    auto sorted = rung;
    std::stable_sort(sorted.begin(), sorted.end(), [](const RungEntry& a, const RungEntry& b) {
      if (a.crashed != b.crashed) return !a.crashed;
      return !a.crashed && a.loss < b.loss;
    });
    for (std::size_t i = 0; i < promoted.size(); ++i) v.require(promoted[i] == sorted[i].config_id, "promotion order");
  }

  const auto s1 = testing::space("space1.json");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto l = budget_ladder(seed % 3 ? 5 : 12, 50, seed % 2 ? 2.0 : 3.0);
    auto obj = std::make_shared<SyntheticCurveObjective>(s1, SyntheticCurveParams::standard(s1->dimension(), seed % 4));
    RunOptions o;
    o.limits.max_iterations = static_cast<int>(1 + seed % 7);
    o.limits.seed = seed;
    v.require(no_budget_skipping(run(s1, obj, l, o), l), "run seed " + std::to_string(seed));
  }
  v.detail << "sizes [4,2,1]/[3,1]/[3], 500 promotions, 100 runs";
}

// ---------------------------------------------------------------------------------------
// 4. BOHB beats random search

void bohb_vs_random_criterion(Verdict& v) {
  const auto space = testing::space("space1.json");
  auto obj = std::make_shared<SyntheticCurveObjective>(space, SyntheticCurveParams::standard(space->dimension()));
  const auto ladder = budget_ladder(12, 50, 2);
  constexpr std::size_t kEvaluations = 200;
  int wins = 0;
  std::vector<double> bohb_losses, random_losses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunOptions o;
    o.limits.max_iterations = 1000;
    o.limits.seed = seed;
    std::size_t seen = 0;
    double compute = 0.0;
    double best = kCrashLoss;
    o.on_record = [&](const EvaluationRecord& r, const JobResult&) {
      if (seen >= kEvaluations) throw std::runtime_error("stop");
      ++seen;
      compute += r.budget;
      if (r.budget == ladder.b_max) best = std::min(best, r.loss);
    };
    try {
      run(space, obj, ladder, o);
    } catch (const std::runtime_error&) {
    }
    const auto n_random = static_cast<std::size_t>(std::floor(compute / ladder.b_max));
    const auto rs = run_random_search(space, obj, ladder.b_max, n_random, seed + 1000);
    const double random_best = incumbent(rs, ladder.b_max).loss;
    bohb_losses.push_back(best);
    random_losses.push_back(random_best);
    wins += best <= random_best;
  }
  // One-sided sign test: P(X >= wins) for X ~ Binomial(20, 0.5).
  double p = 0.0;
  for (int k = wins; k <= 20; ++k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (20 - i) / (i + 1);
    p += c / std::pow(2.0, 20);
  }
  auto median = [](std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return 0.5 * (x[x.size() / 2 - 1] + x[x.size() / 2]);
  };
  v.require(wins >= 15, "BOHB won only " + std::to_string(wins) + " of 20");
  v.require(p < 0.05, "sign test");
  v.detail << "BOHB <= random in " << wins << "/20 seeds, sign-test p=" << p << ", median loss BOHB "
           << median(bohb_losses) << " vs random " << median(random_losses);
}

// ---------------------------------------------------------------------------------------
// 5. Portfolio warmstart

void portfolio_warmstart_criterion(Verdict& v) {
  const auto space = testing::space("space1.json");
  const auto portfolio = Portfolio::load(testing::data_path("portfolio.json"), *space);
  const auto ladder = budget_ladder(12, 50, 2);
  int better = 0;
  std::ostringstream per;
  for (const auto& name : {"adult", "higgs", "jasmine", "vehicle", "volkert"}) {
    auto bundle = std::make_shared<const ReplayBundle>(
        load_replay(testing::data_path(std::string("mini_lcbench/") + name + ".json"), space));
    auto obj = std::make_shared<ReplayObjective>(bundle, ReplayMode::surrogate, false);
    double with = 0.0, without = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RunOptions o;
      o.limits.max_iterations = 1;
      o.limits.seed = seed;
      without += incumbent(run(space, obj, ladder, o), ladder.b_max).loss / 10.0;
      o.portfolio = portfolio.entries;
      with += incumbent(run(space, obj, ladder, o), ladder.b_max).loss / 10.0;
    }
    better += with <= without;
    per << name << " " << with << "/" << without << " ";
  }
  v.require(better >= 4, "portfolio helped on " + std::to_string(better) + " datasets");
  v.detail << better << "/5 datasets improved (with/without: " << per.str() << ")";
}

// ---------------------------------------------------------------------------------------
// 6. Greedy portfolio oracle

void greedy_portfolio_criterion(Verdict& v) {
  Rng rng(6);
  std::uniform_int_distribution<std::size_t> nc(2, 6), nd(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto summed = [](const Matrix& r, const std::vector<std::size_t>& set) {
    double total = 0.0;
    for (std::size_t d = 0; d < r.cols(); ++d) {
      double best = 1e300;
      for (auto c : set) best = std::min(best, r(c, d));
      total += best;
    }
    return total;
  };
  auto brute = [&](const Matrix& r, const std::vector<std::size_t>& chosen) {
    std::size_t best = r.rows();
    double best_v = 1e300;
    for (std::size_t c = 0; c < r.rows(); ++c) {
      if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      auto s = chosen;
      s.push_back(c);
      if (const double val = summed(r, s); val < best_v) {
        best_v = val;
        best = c;
      }
    }
    return best;
  };
  for (int t = 0; t < 200; ++t) {
    Matrix acc(nc(rng), nd(rng));
    for (auto& x : acc.data()) x = std::round(u(rng) * 20) / 20;
    const auto r = relative_regret(acc);
    const auto g = greedy_build(r, 2);
    const auto first = brute(r, {});
    v.require(g.order[0] == first && g.order[1] == brute(r, {first}), "matrix " + std::to_string(t));
    const auto curve = portfolio_size_curve(r, r.rows());
    for (std::size_t i = 1; i < curve.size(); ++i) v.require(curve[i].second <= curve[i - 1].second, "curve");
  }
  v.detail << "200 random matrices agree with brute force";
}

// ---------------------------------------------------------------------------------------
// 7. Ensemble selection oracle

void ensemble_criterion(Verdict& v) {
  Rng rng(7);
  std::uniform_int_distribution<std::size_t> n_models(1, 5);
  std::uniform_int_distribution<int> label(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto accuracy = [](const PredictionStore& s, const std::vector<std::size_t>& members) {
    std::size_t hits = 0;
    const auto rows = s.entries.front().predictions.rows();
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t best = 0;
      double best_v = -1;
      for (std::size_t c = 0; c < 3; ++c) {
        double x = 0;
        for (auto m : members) x += s.entries[m].predictions(i, c);
        x /= static_cast<double>(members.size());
        if (x > best_v) {
          best_v = x;
          best = c;
        }
      }
      hits += static_cast<int>(best) == s.labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(rows);
  };
  std::size_t margins = 0;
  for (int t = 0; t < 50; ++t) {
    PredictionStore s;
    for (int i = 0; i < 20; ++i) s.labels.push_back(label(rng));
    const auto n = n_models(rng);
    for (std::size_t m = 0; m < n; ++m) {
      Matrix p(20, 3);
      for (std::size_t i = 0; i < 20; ++i) {
        double z = 0;
        for (std::size_t c = 0; c < 3; ++c) z += p(i, c) = std::exp(3 * u(rng));
        for (std::size_t c = 0; c < 3; ++c) p(i, c) /= z;
      }
      s.entries.push_back({"m" + std::to_string(m), 50, std::move(p), u(rng), 0});
    }
    // Brute force along the greedy frontier: best single, then best extension of it.
    std::size_t first = 0;
    double best1 = -1;
    for (std::size_t m = 0; m < n; ++m)
      if (const double a = accuracy(s, {m}); a > best1) {
        best1 = a;
        first = m;
      }
    std::size_t second = 0;
    double best2 = -1;
    for (std::size_t m = 0; m < n; ++m)
      if (const double a = accuracy(s, {first, m}); a > best2) {
        best2 = a;
        second = m;
      }
    const auto two = greedy_select(s, 2);
    v.require(two.selection_order[0] == s.entries[first].model_id &&
                  two.selection_order[1] == s.entries[second].model_id,
              "size-2 selection, store " + std::to_string(t));
    const auto full = greedy_select(s, 50);
    const double score = score_predictions(ensemble_predict(full, s), s.labels, EnsembleMetric::accuracy);
    v.require(score >= best1, "final ensemble below best single member");
    margins += score > best1;
  }
  v.detail << "50 stores agree with brute force; ensemble strictly better than best single in " << margins;
}

// ---------------------------------------------------------------------------------------
// 8. Spearman

void spearman_criterion(Verdict& v) {
  Rng rng(8);
  std::uniform_int_distribution<int> len(2, 50), val(0, 7);
  auto ranks = [](const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double less = 0, equal = 0;
      for (double y : x) {
        less += y < x[i];
        equal += y == x[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> x(n), y(n);
    for (auto& a : x) a = val(rng);
    for (auto& a : y) a = val(rng);
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n, my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (rx[i] - mx) * (ry[i] - my);
      sxx += (rx[i] - mx) * (rx[i] - mx);
      syy += (ry[i] - my) * (ry[i] - my);
    }
    const auto rho = spearman(x, y);
    if (sxx == 0 || syy == 0) {
      v.require(!rho.has_value(), "constant input must be undefined");
      continue;
    }
    v.require(rho.has_value(), "defined input");
    if (rho) worst = std::max(worst, std::abs(*rho - sxy / std::sqrt(sxx * syy)));
  }
  v.require(worst <= 1e-12, "oracle mismatch");

  const auto space = testing::space("space1.json");
  auto params = SyntheticCurveParams::standard(space->dimension());
  params.noise = 0.0;
  SyntheticCurveObjective obj(space, params);
  const auto report = budget_correlation(obj, 500, 12, 50, ScheduleMode::non_adaptive, 50, 0);
  const double rho = report.rho.front().value_or(-2.0);
  v.require(rho >= 0.8, "synthetic (12, 50) correlation");
  v.detail << "max oracle deviation " << worst << ", synthetic rho(12,50)=" << rho;
}

// ---------------------------------------------------------------------------------------
// 9. fANOVA and LPI

double quadrature_mismatch(const ForestSurrogate& f, std::size_t d, std::size_t grid) {
  const auto report = fanova_first_order(f, std::vector<std::string>(d, "x"));
  std::vector<double> oracle(d, 0.0);
  std::size_t total_points = 1;
  for (std::size_t j = 0; j < d; ++j) total_points *= grid;
  for (const auto& tree : f.trees()) {
    std::vector<double> values(total_points), x(d);
    for (std::size_t p = 0; p < total_points; ++p) {
      std::size_t rest = p;
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = (static_cast<double>(rest % grid) + 0.5) / static_cast<double>(grid);
        rest /= grid;
      }
      values[p] = tree.predict(x);
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(total_points);
    double var = 0;
    for (double y : values) var += (y - mean) * (y - mean) / static_cast<double>(total_points);
    if (var <= 1e-14) continue;
    std::size_t stride = 1;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> marginal(grid, 0.0);
      for (std::size_t p = 0; p < total_points; ++p)
        marginal[(p / stride) % grid] += values[p] / static_cast<double>(total_points / grid);
      double vj = 0;
      for (double m : marginal) vj += (m - mean) * (m - mean) / static_cast<double>(grid);
      oracle[j] += vj / var / static_cast<double>(f.trees().size());
      stride *= grid;
    }
  }
  double worst = 0;
  for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(report.scores[j] - oracle[j]));
  return worst;
}

void importance_criterion(Verdict& v) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto fit = [&](std::size_t n, std::size_t d, const std::function<double(const std::vector<double>&)>& f,
                 ForestSettings settings = {}) {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(d);
      for (auto& a : x) a = u(rng);
      y.push_back(f(x));
      X.push_back(std::move(x));
    }
    return fit_forest(X, y, rng, settings);
  };
  const std::vector<std::string> names{"x1", "x2"};
  const auto linear = fanova_first_order(fit(1000, 2, [](const auto& x) { return x[0]; }), names);
  v.require(linear.scores[0] >= 0.9, "importance(x1) on f = x1");
  const auto sym = fanova_first_order(fit(1000, 2, [](const auto& x) { return x[0] + x[1]; }), names);
  v.require(std::abs(sym.scores[0] - sym.scores[1]) <= 0.1, "symmetric split");

  double worst = 0;
  ForestSettings small;
  small.n_trees = 8;
  for (std::size_t d = 1; d <= 3; ++d) {
    const auto f = fit(300, d, [](const auto& x) {
      double s = 0;
      for (std::size_t j = 0; j < x.size(); ++j) s += (j + 1.0) * x[j] * x[j];
      return s + (x.size() > 1 ? std::sin(5 * x[0] * x[1]) : 0.0);
    }, small);
    worst = std::max(worst, quadrature_mismatch(f, d, d == 3 ? 64 : 256));
  }
  v.require(worst <= 0.05, "quadrature oracle");

  const std::vector<std::vector<double>> grid(2, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  const auto one = lpi_grid([](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5); }, {0.5, 0.3}, grid,
                            names);
  v.require(one.scores[0] == 1.0 && one.scores[1] == 0.0, "LPI single active");
  const auto two = lpi_grid(
      [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5); }, {0.5, 0.5},
      grid, names);
  v.require(std::abs(two.scores[0] - 0.5) < 1e-12 && std::abs(two.scores[1] - 0.5) < 1e-12, "LPI symmetric");

  const auto s2 = testing::space("space2.json");
  Rng crng(19);
  double worst_sum = 0;
  for (int t = 0; t < 20; ++t) {
    const auto c = s2->sample_uniform(crng);
    const auto r = lpi(*s2, [](std::span<const double> x) {
      double s = 0;
      for (std::size_t j = 0; j < x.size(); ++j) s += std::cos(2.0 * x[j] * static_cast<double>(j + 1));
      return s;
    }, c);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(r.scores.begin(), r.scores.end(), 0.0) - 1.0));
    for (std::size_t j = 0; j < r.names.size(); ++j)
      if (!c.contains(r.names[j])) v.require(r.scores[j] == 0.0, "inactive LPI score");
  }
  v.require(worst_sum < 1e-12, "LPI sums to 1");
  v.detail << "importance(x1)=" << linear.scores[0] << ", symmetric gap " << std::abs(sym.scores[0] - sym.scores[1])
           << ", quadrature gap " << worst;
}

// ---------------------------------------------------------------------------------------
// 10. Parallel speedup and worker death

class KillOnce : public Objective {
 public:
  explicit KillOnce(std::uint64_t victim) : victim_(victim) {}
  JobResult evaluate(const Job& job) const override {
    {
      std::lock_guard lock(mu_);
      ++calls_[job.job_id];
      if (job.job_id == victim_ && calls_[job.job_id] == 1) throw WorkerDeath("killed");
    }
    return inner_.evaluate(job);
  }
  std::string describe() const override { return "kill-once"; }
  std::map<std::uint64_t, int> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  SleepObjective inner_{std::chrono::milliseconds(20)};
  std::uint64_t victim_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, int> calls_;
};

void parallel_criterion(Verdict& v) {
  auto sleep = std::make_shared<SleepObjective>(std::chrono::milliseconds(50));
  std::vector<Job> jobs;
  for (std::uint64_t i = 0; i < 30; ++i) jobs.push_back({i, Configuration{}, 50, 0});
  auto t0 = std::chrono::steady_clock::now();
  const auto seq = serve(sleep, jobs, 1);
  const double t_seq = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto par = serve(sleep, jobs, 3);
  const double t_par = seconds_since(t0);
  v.require(seq.size() == 30 && par.size() == 30, "all jobs returned");
  v.require(t_par <= 0.45 * t_seq, "speedup");

  auto killer = std::make_shared<KillOnce>(13);
  const auto res = serve(killer, jobs, 3);
  std::set<std::uint64_t> ids;
  bool all_ok = true;
  for (const auto& r : res) {
    ids.insert(r.job_id);
    all_ok = all_ok && r.status == JobStatus::ok;
  }
  v.require(ids.size() == 30 && all_ok, "complete after worker death");
  std::size_t reexecuted = 0;
  for (const auto& [id, n] : killer->calls()) reexecuted += n > 1 ? (id == 13 ? 1 : 100) : 0;
  v.require(reexecuted == 1, "exactly the killed job re-executed");
  v.detail << "sequential " << t_seq << " s, 3 workers " << t_par << " s (ratio " << t_par / t_seq
           << "), killed-worker run complete";
}

// ---------------------------------------------------------------------------------------
// 11. Determinism and resume

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism_criterion(Verdict& v) {
  testing::TempDir dir("acceptance");
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"optimize", "--space", testing::data_path("space1.json").string(), "--objective",
                                    "replay:" + testing::data_path("mini_lcbench/adult.json").string(), "--b-min",
                                    "12", "--b-max", "50", "--eta", "2", "--iterations", "20", "--seed", "7", "--out",
                                    (dir / out).string()};
  };
  std::ostringstream sink;
  v.require(cli::run(args("a"), sink, sink) == 0, "first run");
  v.require(cli::run(args("b"), sink, sink) == 0, "second run");
  const auto a = slurp(dir / "a" / "runhistory.jsonl");
  v.require(!a.empty() && a == slurp(dir / "b" / "runhistory.jsonl"), "byte-identical runhistory");

  // Interrupt: keep the first half of the lines plus a torn partial record.
  std::vector<std::string> lines;
  std::istringstream in(a);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  std::ofstream(dir / "b" / "runhistory.jsonl", std::ios::trunc | std::ios::binary) << [&] {
    std::string s;
    for (std::size_t i = 0; i < lines.size() / 2; ++i) s += lines[i] + "\n";
    return s + lines[lines.size() / 2].substr(0, 17);
  }();
  auto resume = args("b");
  resume.push_back("--resume");
  v.require(cli::run(resume, sink, sink) == 0, "resumed run");
  const auto full = load_run(dir / "a");
  const auto resumed = load_run(dir / "b");
  const auto& ia = incumbent(full.history, 50);
  const auto& ib = incumbent(resumed.history, 50);
  v.require(ia.configuration == ib.configuration && ia.loss == ib.loss, "same incumbent after resume");
  v.detail << lines.size() << " records, resumed from " << lines.size() / 2 << ", incumbent loss " << ib.loss;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"budget ladder (12, 50, 2)", budget_ladder_criterion},
      {"funnel widths", funnel_criterion},
      {"SuccessiveHalving/Hyperband schedule", schedule_criterion},
      {"BOHB beats random search", bohb_vs_random_criterion},
      {"portfolio warmstart helps", portfolio_warmstart_criterion},
      {"greedy portfolio oracle", greedy_portfolio_criterion},
      {"ensemble selection oracle", ensemble_criterion},
      {"Spearman correctness", spearman_criterion},
      {"fANOVA and LPI sanity", importance_criterion},
      {"parallel speedup", parallel_criterion},
      {"determinism and resume", determinism_criterion},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " ("
              << seconds_since(t0) << " s): " << v.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
