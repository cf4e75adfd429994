#include "multifid_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>

#include <CLI11.hpp>

#include <multifid/analysis.hpp>
#include <multifid/ensemble.hpp>
#include <multifid/fixtures.hpp>
#include <multifid/objectives.hpp>
#include <multifid/optimizer.hpp>
#include <multifid/portfolio.hpp>
#include <multifid/run_io.hpp>
#include <multifid/shaped_arch.hpp>
#include <multifid/socket_objective.hpp>

namespace fs = std::filesystem;

namespace multifid::cli {

ObjectiveHandle make_objective(const std::string& uri, std::shared_ptr<const ConfigurationSpace> space,
                               const ObjectiveOptions& options) {
  const auto colon = uri.find(':');
  if (colon == std::string::npos) throw UsageError("objective must be replay:, synthetic: or socket:, got " + uri);
  const std::string scheme = uri.substr(0, colon);
  const std::string rest = uri.substr(colon + 1);
  ObjectiveHandle h;
  if (scheme == "replay") {
    auto bundle = std::make_shared<const ReplayBundle>(load_replay(rest, space));
    h.dataset = bundle->dataset;
    h.bundle = bundle;
    h.objective = std::make_shared<ReplayObjective>(
        bundle, options.strict_replay ? ReplayMode::strict : ReplayMode::surrogate);
  } else if (scheme == "synthetic") {
    std::uint64_t variant = 0;
    static const std::regex pattern("v([0-9]+)");
    std::smatch m;
    if (std::regex_match(rest, m, pattern))
      variant = std::stoull(m[1].str());
    else if (rest != "default")
      throw UsageError("synthetic objective must be 'default' or 'v<k>', got " + rest);
    auto params = SyntheticCurveParams::standard(space->dimension(), variant);
    params.n_validation_instances = options.synthetic_predictions;
    if (options.synthetic_noise) params.noise = *options.synthetic_noise;
    h.dataset = rest;
    h.objective = std::make_shared<SyntheticCurveObjective>(space, params, rest);
  } else if (scheme == "socket") {
    h.dataset = rest;
    h.objective = SocketObjective::from_address(rest);
  } else {
    throw UsageError("unknown objective scheme: " + scheme);
  }
  return h;
}

namespace {

std::uint64_t resolve_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("MULTIFID_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("MULTIFID_SEED is not an unsigned integer: ") + env);
    }
  }
  return flag;
}

std::shared_ptr<const ConfigurationSpace> load_space(const std::string& path) {
  return std::make_shared<const ConfigurationSpace>(ConfigurationSpace::load(path));
}

void result_line(std::ostream& out, const json& j) { out << "RESULT " << j.dump() << std::endl; }

std::vector<std::pair<int, int>> budget_pairs(const std::vector<int>& budgets) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < budgets.size(); ++i)
    for (std::size_t j = i + 1; j < budgets.size(); ++j) pairs.emplace_back(budgets[i], budgets[j]);
  return pairs;
}

struct OptimizeArgs {
  std::string space, objective, out = "run", portfolio;
  double b_min = 12, b_max = 50, eta = 2;
  int iterations = 10, workers = 1;
  double wall_clock = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  bool resume = false, strict = false;
  KdeSettings kde;
};

int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
  auto space = load_space(a.space);
  ObjectiveOptions oo;
  oo.strict_replay = a.strict;
  auto handle = make_objective(a.objective, space, oo);
  if (a.workers < 1) throw UsageError("--workers must be at least 1");
  if (a.resume && a.workers != 1) throw UsageError("--resume requires --workers 1");
  BudgetLadder ladder;
  try {
    ladder = budget_ladder(a.b_min, a.b_max, a.eta);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  RunOptions options;
  options.limits = {a.iterations, a.wall_clock, resolve_seed(a.seed), a.workers};
  options.kde = a.kde;
  std::optional<std::string> portfolio_path;
  if (!a.portfolio.empty()) {
    options.portfolio = Portfolio::load(a.portfolio, *space).entries;
    portfolio_path = a.portfolio;
  }
  const fs::path dir(a.out);
  if (a.resume && fs::exists(dir / "runhistory.jsonl"))
    options.resume = read_runhistory(dir / "runhistory.jsonl", *space);

  RunMeta meta{a.objective, a.space, portfolio_path, ladder, options.limits};
  RunWriter writer(dir, *space, meta, handle.objective->validation_labels());
  options.on_record = [&](const EvaluationRecord& r, const JobResult& res) { writer.write_record(r, res); };
  const auto history = run(space, handle.objective, ladder, options);
  writer.finalize(history);

  json summary{{"command", "optimize"}, {"run_dir", dir.string()}, {"run_id", meta.run_id()},
               {"n_records", history.size()}, {"resumed_records", options.resume.size()},
               {"budget", ladder.b_max}};
  try {
    const auto& best = incumbent(history, ladder.b_max);
    summary["incumbent_loss"] = best.loss;
    summary["incumbent"] = best.configuration.to_json();
  } catch (const NoRecordsError&) {
    summary["incumbent_loss"] = nullptr;
  }
  result_line(out, summary);
  return 0;
}

struct PortfolioArgs {
  std::string space, out_dir = ".";
  std::vector<std::string> runs, objectives, datasets;
  std::size_t size = 16;
  double b_max = 0;
  bool absolute = false;
  int workers = 1;
  std::uint64_t seed = 0;
};

int cmd_portfolio(const PortfolioArgs& a, std::ostream& out) {
  auto space = load_space(a.space);
  if (!a.datasets.empty() && a.datasets.size() != a.objectives.size())
    throw UsageError("--datasets needs one name per --objective");
  std::vector<std::shared_ptr<const Objective>> objectives;
  std::vector<std::string> names;
  ObjectiveOptions oo;
  oo.synthetic_predictions = 0;
  for (std::size_t i = 0; i < a.objectives.size(); ++i) {
    auto h = make_objective(a.objectives[i], space, oo);
    objectives.push_back(h.objective);
    names.push_back(a.datasets.empty() ? h.dataset : a.datasets[i]);
  }
  double b_max = a.b_max;
  if (b_max <= 0) {
    const auto run0 = load_run(a.runs.front());
    b_max = run0.history.trajectory_budget();
  }
  std::vector<fs::path> dirs(a.runs.begin(), a.runs.end());
  const auto matrix = build_matrix(dirs, objectives, names, b_max, a.workers, resolve_seed(a.seed));
  if (a.size > matrix.candidates.size())
    throw std::runtime_error("portfolio size " + std::to_string(a.size) + " exceeds the " +
                             std::to_string(matrix.candidates.size()) + " distinct incumbents");
  const auto regrets = relative_regret(matrix, a.absolute ? RegretKind::absolute : RegretKind::relative);
  const auto greedy = greedy_build(regrets, a.size);
  const auto portfolio = make_portfolio(matrix, greedy, a.space);
  fs::create_directories(a.out_dir);
  portfolio.save(fs::path(a.out_dir) / "portfolio.json");
  write_performance_csv(fs::path(a.out_dir) / "matrix.csv", matrix);
  std::size_t imputed = static_cast<std::size_t>(std::count(matrix.imputed.begin(), matrix.imputed.end(), true));
  result_line(out, {{"command", "portfolio"},
                    {"portfolio", (fs::path(a.out_dir) / "portfolio.json").string()},
                    {"matrix", (fs::path(a.out_dir) / "matrix.csv").string()},
                    {"candidates", matrix.candidates.size()},
                    {"datasets", matrix.datasets.size()},
                    {"size", a.size},
                    {"imputed_cells", imputed},
                    {"mean_regret", greedy.mean_regret.back()}});
  return 0;
}

struct EnsembleArgs {
  std::string run, out, metric = "accuracy";
  std::size_t k = 30, size = 50;
  bool trajectory = false;
};

int cmd_ensemble(const EnsembleArgs& a, std::ostream& out) {
  const fs::path dir(a.run);
  const auto metric = metric_from_string(a.metric);
  const auto store = load_prediction_store(dir / "predictions");
  const auto filtered = topk_filter(store, a.k);
  const auto ensemble = greedy_select(filtered, a.size, metric);
  double best_single = 0.0;
  for (const auto& e : filtered.entries)
    best_single = std::max(best_single, score_predictions(e.predictions, store.labels, metric));
  const fs::path out_file = a.out.empty() ? dir / "ensemble.json" : fs::path(a.out);
  {
    std::ofstream f(out_file, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + out_file.string());
    f << ensemble.to_json().dump(2) << '\n';
  }
  json summary{{"command", "ensemble"}, {"ensemble", out_file.string()}, {"score", ensemble.score},
               {"best_single_score", best_single}, {"members", ensemble.members.size()},
               {"candidates", filtered.entries.size()}};
  if (a.trajectory) {
    const auto steps = ensemble_trajectory(store, a.k, a.size, metric);
    const auto file = out_file.parent_path() / "ensemble_trajectory.csv";
    std::ofstream f(file, std::ios::trunc);
    f << "wall_time_s,n_models,score\n";
    for (const auto& s : steps) f << format_double(s.timestamp) << ',' << s.n_models << ',' << format_double(s.score) << '\n';
    summary["trajectory"] = file.string();
  }
  result_line(out, summary);
  return 0;
}

struct AnalyzeArgs {
  std::string space, run, objective, out, out_dir = ".", matrix, mode = "non-adaptive", method = "both";
  std::vector<std::string> replays;
  std::vector<int> budgets;
  std::size_t configs = 500, trees = 32, grid = 21, max_size = 0;
  std::uint64_t seed = 0;
  bool reproducible = false, absolute = false, noise_off = false;
};

std::vector<ReplayBundle> load_bundles(const AnalyzeArgs& a) {
  std::shared_ptr<const ConfigurationSpace> space;
  if (!a.space.empty()) space = load_space(a.space);
  std::vector<ReplayBundle> out;
  for (const auto& p : a.replays) out.push_back(load_replay(p, space));
  return out;
}

std::vector<ScheduleMode> modes_from(const std::string& s) {
  if (s == "all") return {ScheduleMode::non_adaptive, ScheduleMode::adaptive, ScheduleMode::cross};
  return {schedule_mode_from_string(s)};
}

int cmd_correlation(const AnalyzeArgs& a, std::ostream& out) {
  std::vector<CorrelationReport> reports;
  auto budgets = a.budgets.empty() ? std::vector<int>{12, 25, 50} : a.budgets;
  std::sort(budgets.begin(), budgets.end());
  const auto pairs = budget_pairs(budgets);
  if (!a.replays.empty()) {
    const auto bundles = load_bundles(a);
    for (auto mode : modes_from(a.mode))
      for (auto [x, y] : pairs) reports.push_back(budget_correlation(bundles, x, y, mode));
  } else if (!a.run.empty()) {
    const auto loaded = load_run(a.run);
    for (auto [x, y] : pairs) reports.push_back(budget_correlation(loaded.history, a.run, x, y));
  } else if (!a.objective.empty()) {
    if (a.space.empty()) throw UsageError("--objective needs --space");
    auto space = load_space(a.space);
    ObjectiveOptions oo;
    oo.synthetic_predictions = 0;
    if (a.noise_off) oo.synthetic_noise = 0.0;
    auto h = make_objective(a.objective, space, oo);
    auto synthetic = std::dynamic_pointer_cast<const SyntheticCurveObjective>(h.objective);
    if (!synthetic) throw UsageError("correlation over --objective needs a synthetic objective");
    for (auto mode : modes_from(a.mode))
      for (auto [x, y] : pairs)
        reports.push_back(budget_correlation(*synthetic, a.configs, x, y, mode, budgets.back(), resolve_seed(a.seed)));
  } else {
    throw UsageError("correlation needs --replay, --run or --objective");
  }
  const fs::path file = a.out.empty() ? fs::path("correlation.csv") : fs::path(a.out);
  write_correlation_csv(file, reports);
  json js = json::array();
  for (const auto& r : reports) js.push_back(r.to_json());
  result_line(out, {{"command", "analyze correlation"}, {"csv", file.string()}, {"reports", js}});
  return 0;
}

struct ImportanceInput {
  std::string dataset;
  double budget;
  std::vector<Configuration> configs;
  std::vector<double> losses;
};

int cmd_importance(const AnalyzeArgs& a, std::ostream& out) {
  std::shared_ptr<const ConfigurationSpace> space;
  std::vector<ImportanceInput> inputs;
  if (!a.replays.empty()) {
    const auto bundles = load_bundles(a);
    space = bundles.front().space;
    auto budgets = a.budgets.empty() ? std::vector<int>{12, 25, 50} : a.budgets;
    for (const auto& b : bundles)
      for (int budget : budgets) {
        ImportanceInput in{b.dataset, static_cast<double>(budget), {}, {}};
        for (const auto& r : b.records) {
          if (static_cast<int>(r.val_curve.size()) < budget) continue;
          in.configs.push_back(r.config);
          in.losses.push_back(1.0 - r.val_curve[static_cast<std::size_t>(budget - 1)]);
        }
        inputs.push_back(std::move(in));
      }
  } else if (!a.run.empty()) {
    const auto loaded = load_run(a.run);
    space = loaded.space;
    std::map<double, ImportanceInput> by_budget;
    for (const auto& r : loaded.history.records()) {
      if (r.crashed) continue;
      auto& in = by_budget.try_emplace(r.budget, ImportanceInput{a.run, r.budget, {}, {}}).first->second;
      in.configs.push_back(r.configuration);
      in.losses.push_back(r.loss);
    }
    for (auto& [b, in] : by_budget)
      if (in.configs.size() >= 20) inputs.push_back(std::move(in));
    if (inputs.empty()) throw std::runtime_error("no budget in the run has at least 20 successful evaluations");
  } else {
    throw UsageError("importance needs --replay or --run");
  }
  if (a.method != "fanova" && a.method != "lpi" && a.method != "both")
    throw UsageError("--method must be fanova, lpi or both");

  std::vector<std::string> names;
  for (const auto& hp : space->hyperparameters()) names.push_back(hp.name);
  std::vector<ImportanceReport> reports;
  ForestSettings fs_settings;
  fs_settings.n_trees = a.trees;
  for (const auto& in : inputs) {
    std::vector<std::vector<double>> X;
    for (const auto& c : in.configs) X.push_back(analysis_features(*space, c));
    Rng rng(hash_combine(resolve_seed(a.seed), fnv1a64(in.dataset)));
    const auto forest = fit_forest(X, in.losses, rng, fs_settings);
    if (a.method != "lpi") {
      auto r = fanova_first_order(forest, names);
      r.dataset = in.dataset;
      r.budget = in.budget;
      reports.push_back(std::move(r));
    }
    if (a.method != "fanova") {
      const auto best = static_cast<std::size_t>(std::min_element(in.losses.begin(), in.losses.end()) - in.losses.begin());
      auto r = lpi(*space, [&](std::span<const double> x) { return forest.predict(x); }, in.configs[best], a.grid);
      r.dataset = in.dataset;
      r.budget = in.budget;
      reports.push_back(std::move(r));
    }
  }
  const fs::path file = a.out.empty() ? fs::path("importance.csv") : fs::path(a.out);
  write_importance_csv(file, reports);
  json js = json::array();
  for (const auto& r : reports) js.push_back(r.to_json());
  result_line(out, {{"command", "analyze importance"}, {"csv", file.string()}, {"reports", js}});
  return 0;
}

int cmd_heatmap(const AnalyzeArgs& a, std::ostream& out) {
  if (a.replays.size() < 2) throw UsageError("heatmap needs at least two --replay bundles");
  const auto h = performance_heatmap(load_bundles(a));
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_heatmap_csv(dir / "accuracy.csv", h.row_ids, h.col_ids, h.accuracy);
  write_heatmap_csv(dir / "regret.csv", h.regret_row_ids, h.regret_col_ids, h.regret);
  write_heatmap_svg(dir / "accuracy.svg", h.row_ids, h.col_ids, h.accuracy, "validation accuracy", a.reproducible);
  write_heatmap_svg(dir / "regret.svg", h.regret_row_ids, h.regret_col_ids, h.regret, "relative regret",
                    a.reproducible);
  result_line(out, {{"command", "analyze heatmap"}, {"out_dir", dir.string()}, {"configs", h.row_ids.size()},
                    {"datasets", h.col_ids.size()}, {"unique_best", h.unique_best}});
  return 0;
}

int cmd_portfolio_curve(const AnalyzeArgs& a, std::ostream& out) {
  if (a.matrix.empty()) throw UsageError("portfolio-curve needs --matrix");
  const auto m = read_performance_csv(a.matrix);
  const auto regrets = relative_regret(m, a.absolute ? RegretKind::absolute : RegretKind::relative);
  const std::size_t max_size = a.max_size ? std::min(a.max_size, m.scores.rows()) : m.scores.rows();
  const auto curve = portfolio_size_curve(regrets, max_size);
  const fs::path file = a.out.empty() ? fs::path("portfolio_curve.csv") : fs::path(a.out);
  std::ofstream f(file, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << "size,mean_regret\n";
  json js = json::array();
  for (const auto& [size, regret] : curve) {
    f << size << ',' << format_double(regret) << '\n';
    js.push_back({size, regret});
  }
  result_line(out, {{"command", "analyze portfolio-curve"}, {"csv", file.string()}, {"curve", js}});
  return 0;
}

struct ShapeArgs {
  std::int64_t n_max = 0, layers = 0, n_out = 0, blocks = 0;
};

int cmd_shape(const ShapeArgs& a, std::ostream& out) {
  try {
    if (a.blocks > 0) {
      const auto r = resnet_group_widths(a.n_max, a.layers, a.blocks, a.n_out);
      result_line(out, {{"command", "shape"}, {"groups", r.groups}, {"blocks", r.blocks}});
    } else {
      result_line(out, {{"command", "shape"}, {"widths", funnel_widths({a.n_max, a.layers, a.n_out})}});
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return 0;
}

struct WorkerArgs {
  std::string space, objective;
  int port = 0;
};

int cmd_worker(const WorkerArgs& a, std::ostream& out) {
  auto space = load_space(a.space);
  auto h = make_objective(a.objective, space);
  if (std::dynamic_pointer_cast<const SocketObjective>(h.objective))
    throw UsageError("a worker cannot forward to another socket objective");
  SocketWorkerServer server(h.objective, space, a.port);
  out << "LISTENING " << server.port() << std::endl;
  server.run();
  return 0;
}

struct FixtureArgs {
  std::string space, out_dir;
  std::vector<std::string> datasets;
  std::uint64_t first_variant = 1, seed = 0;
  std::size_t configs = 200, instances = 200;
  int b_max = 50;
  std::vector<int> adaptive{12, 25, 50};
};

int cmd_fixture(const FixtureArgs& a, std::ostream& out) {
  auto space = load_space(a.space);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const auto space_ref = fs::relative(fs::absolute(a.space), fs::absolute(dir)).generic_string();
  json files = json::array();
  for (std::size_t i = 0; i < a.datasets.size(); ++i) {
    BundleRecipe recipe;
    recipe.dataset = a.datasets[i];
    recipe.variant = a.first_variant + i;
    recipe.n_configs = a.configs;
    recipe.b_max = a.b_max;
    recipe.adaptive_budgets = a.adaptive;
    recipe.n_validation_instances = a.instances;
    recipe.seed = resolve_seed(a.seed);
    const auto bundle = record_synthetic_bundle(space, space_ref, recipe);
    const auto file = dir / (a.datasets[i] + ".json");
    std::ofstream f(file, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << replay_to_json(bundle).dump() << '\n';
    files.push_back(file.string());
  }
  result_line(out, {{"command", "fixture"}, {"files", files}});
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-fidelity hyperparameter optimization, portfolios, ensembles and analyses", "multifid"};
  app.require_subcommand(1);

  OptimizeArgs oa;
  auto* optimize = app.add_subcommand("optimize", "Run BOHB and write a run directory");
  optimize->add_option("--space", oa.space, "Configuration space JSON")->required()->check(CLI::ExistingFile);
  optimize->add_option("--objective", oa.objective, "replay:<file>, synthetic:<name> or socket:<host:port>")->required();
  optimize->add_option("--out", oa.out, "Run directory")->capture_default_str();
  optimize->add_option("--b-min", oa.b_min)->capture_default_str();
  optimize->add_option("--b-max", oa.b_max)->capture_default_str();
  optimize->add_option("--eta", oa.eta)->capture_default_str();
  optimize->add_option("--iterations", oa.iterations, "SuccessiveHalving brackets")->capture_default_str();
  optimize->add_option("--wall-clock", oa.wall_clock, "Seconds")->check(CLI::PositiveNumber);
  optimize->add_option("--seed", oa.seed)->capture_default_str();
  optimize->add_option("--workers", oa.workers)->capture_default_str();
  optimize->add_option("--portfolio", oa.portfolio, "Warmstart portfolio JSON")->check(CLI::ExistingFile);
  optimize->add_flag("--resume", oa.resume, "Continue from an existing runhistory.jsonl");
  optimize->add_flag("--strict-replay", oa.strict, "Fail on configurations missing from a replay bundle");
  optimize->add_option("--random-fraction", oa.kde.random_fraction)->capture_default_str();
  optimize->add_option("--top-quantile", oa.kde.split_quantile)->capture_default_str();
  optimize->add_option("--kde-samples", oa.kde.n_samples)->capture_default_str();
  optimize->add_option("--bandwidth-factor", oa.kde.bandwidth_factor)->capture_default_str();
  optimize->add_option("--min-bandwidth", oa.kde.min_bandwidth)->capture_default_str();

  PortfolioArgs pa;
  auto* portfolio = app.add_subcommand("portfolio", "Build a performance matrix and a greedy portfolio");
  portfolio->add_option("--space", pa.space)->required()->check(CLI::ExistingFile);
  portfolio->add_option("--runs", pa.runs, "Run directories supplying candidates")->required();
  portfolio->add_option("--objective", pa.objectives, "One objective per meta dataset")->required();
  portfolio->add_option("--datasets", pa.datasets, "Dataset ids, one per objective");
  portfolio->add_option("--size", pa.size)->capture_default_str();
  portfolio->add_option("--b-max", pa.b_max, "Defaults to the first run's b_max");
  portfolio->add_option("--out-dir", pa.out_dir)->capture_default_str();
  portfolio->add_flag("--absolute-regret", pa.absolute);
  portfolio->add_option("--workers", pa.workers)->capture_default_str();
  portfolio->add_option("--seed", pa.seed)->capture_default_str();

  EnsembleArgs ea;
  auto* ensemble = app.add_subcommand("ensemble", "Greedy ensemble selection over stored predictions");
  ensemble->add_option("--run", ea.run)->required()->check(CLI::ExistingDirectory);
  ensemble->add_option("--k", ea.k, "Top-k models by validation loss")->capture_default_str();
  ensemble->add_option("--size", ea.size, "Ensemble size")->capture_default_str();
  ensemble->add_option("--metric", ea.metric, "accuracy or balanced_accuracy")->capture_default_str();
  ensemble->add_option("--out", ea.out, "Defaults to <run>/ensemble.json");
  ensemble->add_flag("--trajectory", ea.trajectory, "Also write ensemble_trajectory.csv");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Correlation, importance, heatmap and portfolio-curve reports");
  analyze->require_subcommand(1);
  auto* corr = analyze->add_subcommand("correlation", "Spearman correlation between budgets");
  corr->add_option("--replay", aa.replays);
  corr->add_option("--run", aa.run);
  corr->add_option("--objective", aa.objective, "Synthetic objective");
  corr->add_option("--space", aa.space);
  corr->add_option("--budgets", aa.budgets)->delimiter(',');
  corr->add_option("--mode", aa.mode, "non-adaptive, adaptive, cross or all")->capture_default_str();
  corr->add_option("--configs", aa.configs)->capture_default_str();
  corr->add_flag("--noise-off", aa.noise_off);
  corr->add_option("--seed", aa.seed);
  corr->add_option("--out", aa.out);
  auto* imp = analyze->add_subcommand("importance", "fANOVA and LPI hyperparameter importance");
  imp->add_option("--replay", aa.replays);
  imp->add_option("--run", aa.run);
  imp->add_option("--space", aa.space);
  imp->add_option("--budgets", aa.budgets)->delimiter(',');
  imp->add_option("--method", aa.method, "fanova, lpi or both")->capture_default_str();
  imp->add_option("--trees", aa.trees)->capture_default_str();
  imp->add_option("--grid", aa.grid)->capture_default_str();
  imp->add_option("--seed", aa.seed);
  imp->add_option("--out", aa.out);
  auto* heat = analyze->add_subcommand("heatmap", "Accuracy and regret heatmaps");
  heat->add_option("--replay", aa.replays)->required();
  heat->add_option("--space", aa.space);
  heat->add_option("--out-dir", aa.out_dir)->capture_default_str();
  heat->add_flag("--reproducible", aa.reproducible, "Omit the timestamp from SVG output");
  auto* curve = analyze->add_subcommand("portfolio-curve", "Mean regret by greedy portfolio size");
  curve->add_option("--matrix", aa.matrix)->required()->check(CLI::ExistingFile);
  curve->add_option("--max-size", aa.max_size);
  curve->add_flag("--absolute-regret", aa.absolute);
  curve->add_option("--out", aa.out);

  ShapeArgs sa;
  auto* shape = app.add_subcommand("shape", "Funnel MLP or shaped ResNet widths");
  shape->add_option("--n-max", sa.n_max)->required();
  shape->add_option("--layers", sa.layers, "Layers, or groups with --blocks")->required();
  shape->add_option("--n-out", sa.n_out)->required();
  shape->add_option("--blocks", sa.blocks, "Blocks per ResNet group");

  WorkerArgs wa;
  auto* worker = app.add_subcommand("worker", "Serve evaluations over TCP");
  worker->add_option("--space", wa.space)->required()->check(CLI::ExistingFile);
  worker->add_option("--objective", wa.objective)->required();
  worker->add_option("--port", wa.port, "0 picks a free port")->capture_default_str();

  FixtureArgs fa;
  auto* fixture = app.add_subcommand("fixture", "Record synthetic replay bundles");
  fixture->add_option("--space", fa.space)->required()->check(CLI::ExistingFile);
  fixture->add_option("--out-dir", fa.out_dir)->required();
  fixture->add_option("--datasets", fa.datasets)->required()->delimiter(',');
  fixture->add_option("--first-variant", fa.first_variant)->capture_default_str();
  fixture->add_option("--configs", fa.configs)->capture_default_str();
  fixture->add_option("--instances", fa.instances)->capture_default_str();
  fixture->add_option("--b-max", fa.b_max)->capture_default_str();
  fixture->add_option("--adaptive-budgets", fa.adaptive)->delimiter(',');
  fixture->add_option("--seed", fa.seed)->capture_default_str();

  std::vector<const char*> argv{"multifid"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*optimize) return cmd_optimize(oa, out);
    if (*portfolio) return cmd_portfolio(pa, out);
    if (*ensemble) return cmd_ensemble(ea, out);
    if (*corr) return cmd_correlation(aa, out);
    if (*imp) return cmd_importance(aa, out);
    if (*heat) return cmd_heatmap(aa, out);
    if (*curve) return cmd_portfolio_curve(aa, out);
    if (*shape) return cmd_shape(sa, out);
    if (*worker) return cmd_worker(wa, out);
    if (*fixture) return cmd_fixture(fa, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace multifid::cli
