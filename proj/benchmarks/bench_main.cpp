// Microbenchmarks for the hot paths: KDE proposal, fANOVA, greedy portfolio.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <multifid/analysis.hpp>
#include <multifid/forest.hpp>
#include <multifid/kde.hpp>
#include <multifid/portfolio.hpp>

using namespace multifid;

namespace {

void BM_KdePropose(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DimensionInfo> dims(d);
  std::vector<Observation> obs(200);
  for (auto& o : obs) {
    o.point.resize(d);
    for (auto& x : o.point) x = u(rng);
    o.loss = u(rng);
  }
  const auto model = fit_tpe(obs, dims, 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(propose(model, 64, 3.0, rng));
}
BENCHMARK(BM_KdePropose)->Arg(4)->Arg(8)->Arg(16);

void BM_Fanova(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> X(n, std::vector<double>(7));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : X[i]) x = u(rng);
    y[i] = X[i][0] * X[i][0] + 0.5 * X[i][1] + 0.1 * u(rng);
  }
  const auto forest = fit_forest(X, y, rng);
  const std::vector<std::string> names(7, "x");
  for (auto _ : state) benchmark::DoNotOptimize(fanova_first_order(forest, names));
}
BENCHMARK(BM_Fanova)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GreedyPortfolio(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix scores(n, 35);
  for (auto& x : scores.data()) x = u(rng);
  const auto regrets = relative_regret(scores);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_build(regrets, 16));
}
BENCHMARK(BM_GreedyPortfolio)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
