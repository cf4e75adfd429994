#include "multifid/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "multifid/objectives.hpp"
#include "multifid/portfolio.hpp"
#include "multifid/run_io.hpp"

namespace multifid {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: inputs differ in length");
  if (x.size() < 2) throw std::invalid_argument("spearman: need at least two points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("spearman: non-finite input");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string to_string(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::non_adaptive: return "non-adaptive";
    case ScheduleMode::adaptive: return "adaptive";
    case ScheduleMode::cross: return "cross";
  }
  return "non-adaptive";
}

ScheduleMode schedule_mode_from_string(const std::string& s) {
  if (s == "non-adaptive" || s == "non_adaptive") return ScheduleMode::non_adaptive;
  if (s == "adaptive") return ScheduleMode::adaptive;
  if (s == "cross") return ScheduleMode::cross;
  throw std::invalid_argument("unknown schedule mode: " + s);
}

json CorrelationReport::to_json() const {
  json per = json::object();
  for (std::size_t i = 0; i < datasets.size(); ++i) per[datasets[i]] = rho[i] ? json(*rho[i]) : json(nullptr);
  return {{"budget_a", budget_a}, {"budget_b", budget_b}, {"mode", to_string(mode)}, {"rho", per},
          {"n_configs", n_configs}, {"mean", mean}, {"std", stddev}};
}

CorrelationReport correlation_report(const std::vector<std::string>& datasets,
                                     const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                     int budget_a, int budget_b, ScheduleMode mode) {
  CorrelationReport r;
  r.budget_a = budget_a;
  r.budget_b = budget_b;
  r.mode = mode;
  r.datasets = datasets;
  r.n_configs = pairs.empty() ? 0 : pairs.front().first.size();
  std::vector<double> defined;
  for (std::size_t d = 0; d < pairs.size(); ++d) {
    const auto& [a, b] = pairs[d];
    if (a.size() < kMinCorrelationConfigs)
      throw std::invalid_argument("insufficient overlap on " + datasets[d] + ": " + std::to_string(a.size()) +
                                  " configurations, need " + std::to_string(kMinCorrelationConfigs));
    r.n_configs = std::min(r.n_configs, a.size());
    r.rho.push_back(spearman(a, b));
    if (r.rho.back()) defined.push_back(*r.rho.back());
  }
  if (!defined.empty()) {
    r.mean = std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
    if (defined.size() > 1) {
      double ss = 0.0;
      for (double v : defined) ss += (v - r.mean) * (v - r.mean);
      r.stddev = std::sqrt(ss / static_cast<double>(defined.size() - 1));
    }
  }
  return r;
}

namespace {

std::optional<double> replay_score(const ReplayRecord& rec, int budget, bool adaptive, int b_max) {
  if (adaptive) {
    auto it = rec.adaptive_val_curves.find(budget);
    if (it != rec.adaptive_val_curves.end() && static_cast<int>(it->second.size()) >= budget)
      return it->second[static_cast<std::size_t>(budget - 1)];
    if (budget != b_max) return std::nullopt;
  }
  if (budget < 1 || static_cast<int>(rec.val_curve.size()) < budget) return std::nullopt;
  return rec.val_curve[static_cast<std::size_t>(budget - 1)];
}

}  // namespace

CorrelationReport budget_correlation(const std::vector<ReplayBundle>& bundles, int budget_a, int budget_b,
                                     ScheduleMode mode) {
  std::vector<std::string> names;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  const bool adaptive_a = mode != ScheduleMode::non_adaptive;
  const bool adaptive_b = mode == ScheduleMode::adaptive;
  for (const auto& bundle : bundles) {
    std::vector<double> a, b;
    for (const auto& rec : bundle.records) {
      const auto sa = replay_score(rec, budget_a, adaptive_a, bundle.b_max);
      const auto sb = replay_score(rec, budget_b, adaptive_b, bundle.b_max);
      if (!sa || !sb) continue;
      a.push_back(*sa);
      b.push_back(*sb);
    }
    names.push_back(bundle.dataset);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return correlation_report(names, pairs, budget_a, budget_b, mode);
}

CorrelationReport budget_correlation(const RunHistory& history, const std::string& dataset, int budget_a,
                                     int budget_b) {
  std::map<std::uint64_t, double> at_a, at_b;
  for (const auto& r : history.records()) {
    if (r.crashed) continue;
    if (r.budget == budget_a) at_a.emplace(r.config_id, r.loss);
    if (r.budget == budget_b) at_b.emplace(r.config_id, r.loss);
  }
  std::vector<double> a, b;
  for (const auto& [id, loss] : at_a) {
    auto it = at_b.find(id);
    if (it == at_b.end()) continue;
    a.push_back(loss);
    b.push_back(it->second);
  }
  return correlation_report({dataset}, {{std::move(a), std::move(b)}}, budget_a, budget_b,
                            ScheduleMode::non_adaptive);
}

CorrelationReport budget_correlation(const SyntheticCurveObjective& objective, std::size_t n_configs, int budget_a,
                                     int budget_b, ScheduleMode mode, int horizon, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> a, b;
  auto score = [&](const Configuration& c, int budget, bool adaptive) {
    return adaptive ? objective.adaptive_curve(c, budget, horizon, seed).back()
                    : objective.curve(c, budget, seed).back();
  };
  for (std::size_t i = 0; i < n_configs; ++i) {
    const auto c = objective.space().sample_uniform(rng);
    a.push_back(score(c, budget_a, mode != ScheduleMode::non_adaptive));
    b.push_back(score(c, budget_b, mode == ScheduleMode::adaptive));
  }
  return correlation_report({objective.describe()}, {{std::move(a), std::move(b)}}, budget_a, budget_b, mode);
}

void write_correlation_csv(const std::filesystem::path& file, const std::vector<CorrelationReport>& reports) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "dataset,budget_a,budget_b,mode,rho\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.datasets.size(); ++i)
      out << r.datasets[i] << ',' << r.budget_a << ',' << r.budget_b << ',' << to_string(r.mode) << ','
          << (r.rho[i] ? format_double(*r.rho[i]) : std::string("nan")) << '\n';
}

std::vector<double> analysis_features(const ConfigurationSpace& space, const Configuration& config) {
  auto u = space.to_unit_cube(config);
  const auto kinds = space.dimension_kinds();
  for (std::size_t j = 0; j < u.size(); ++j)
    if (kinds[j].kind == DimKind::categorical)
      u[j] = (u[j] + 0.5) / static_cast<double>(kinds[j].levels);
  return u;
}

Configuration configuration_from_features(const ConfigurationSpace& space, std::span<const double> features) {
  std::vector<double> u(features.begin(), features.end());
  const auto kinds = space.dimension_kinds();
  for (std::size_t j = 0; j < u.size(); ++j)
    if (kinds[j].kind == DimKind::categorical) {
      const auto L = static_cast<double>(kinds[j].levels);
      u[j] = std::clamp(std::floor(u[j] * L), 0.0, L - 1.0);
    }
  return space.from_unit_cube(u);
}

json ImportanceReport::to_json() const {
  json s = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) s[names[i]] = scores[i];
  return {{"method", method}, {"dataset", dataset}, {"budget", budget}, {"scores", s}, {"degenerate", degenerate}};
}

ImportanceReport fanova_first_order(const ForestSurrogate& forest, const std::vector<std::string>& names) {
  const std::size_t d = forest.dimension();
  if (names.size() != d) throw std::invalid_argument("one name per forest dimension required");
  ImportanceReport report;
  report.method = "fanova";
  report.names = names;
  report.scores.assign(d, 0.0);
  if (forest.trees().empty()) return report;

  for (const auto& tree : forest.trees()) {
    const auto leaves = tree.leaves();
    double mean = 0.0, second = 0.0;
    for (const auto& leaf : leaves) {
      const double v = leaf.volume();
      mean += leaf.value * v;
      second += leaf.value * leaf.value * v;
    }
    const double total = second - mean * mean;
    if (!(total > 1e-14 * std::max(1.0, second))) continue;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> cuts{0.0, 1.0};
      for (const auto& leaf : leaves) {
        cuts.push_back(leaf.lower[j]);
        cuts.push_back(leaf.upper[j]);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      double vj = 0.0;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double width = cuts[k + 1] - cuts[k];
        if (width <= 0.0) continue;
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        double marginal = 0.0;
        for (const auto& leaf : leaves) {
          const double w = leaf.upper[j] - leaf.lower[j];
          if (w <= 0.0 || mid < leaf.lower[j] || mid >= leaf.upper[j]) continue;
          marginal += leaf.value * leaf.volume() / w;
        }
        vj += width * (marginal - mean) * (marginal - mean);
      }
      report.scores[j] += std::clamp(vj / total, 0.0, 1.0);
    }
  }
  for (auto& s : report.scores) s /= static_cast<double>(forest.trees().size());
  return report;
}

ImportanceReport lpi_grid(const Evaluable& f, const std::vector<double>& incumbent,
                          const std::vector<std::vector<double>>& grids, const std::vector<std::string>& names) {
  if (grids.size() != incumbent.size() || names.size() != incumbent.size())
    throw std::invalid_argument("lpi: grids, names and incumbent differ in dimension");
  ImportanceReport report;
  report.method = "lpi";
  report.names = names;
  report.scores.assign(incumbent.size(), 0.0);
  std::vector<double> x = incumbent;
  std::size_t active = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < grids.size(); ++j) {
    if (grids[j].empty()) continue;
    ++active;
    std::vector<double> values;
    for (double g : grids[j]) {
      x[j] = g;
      values.push_back(f(x));
    }
    x[j] = incumbent[j];
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    report.scores[j] = var / static_cast<double>(values.size());
    total += report.scores[j];
  }
  if (total > 0.0) {
    for (auto& s : report.scores) s /= total;
  } else {
    report.degenerate = true;
    for (std::size_t j = 0; j < grids.size(); ++j)
      report.scores[j] = grids[j].empty() ? 0.0 : 1.0 / static_cast<double>(active);
  }
  return report;
}

ImportanceReport lpi(const ConfigurationSpace& space, const Evaluable& f, const Configuration& incumbent,
                     std::size_t grid_size) {
  if (grid_size < 3) throw std::invalid_argument("lpi grid needs at least 3 points");
  space.validate(incumbent);
  const auto x = analysis_features(space, incumbent);
  const auto kinds = space.dimension_kinds();
  std::vector<std::vector<double>> grids(space.dimension());
  std::vector<std::string> names;
  for (std::size_t j = 0; j < space.dimension(); ++j) {
    const auto& hp = space.hyperparameters()[j];
    names.push_back(hp.name);
    if (!incumbent.contains(hp.name)) continue;
    if (kinds[j].kind == DimKind::categorical) {
      const auto L = static_cast<double>(kinds[j].levels);
      for (std::size_t i = 0; i < hp.levels(); ++i) grids[j].push_back((static_cast<double>(i) + 0.5) / L);
    } else {
      for (std::size_t k = 0; k < grid_size; ++k)
        grids[j].push_back(static_cast<double>(k) / static_cast<double>(grid_size - 1));
    }
  }
  return lpi_grid(f, x, grids, names);
}

void write_importance_csv(const std::filesystem::path& file, const std::vector<ImportanceReport>& reports) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "dataset,hyperparameter,budget,importance,method\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.names.size(); ++i)
      out << r.dataset << ",\"" << r.names[i] << "\"," << format_double(r.budget) << ',' << format_double(r.scores[i]) << ','
          << r.method << '\n';
}

namespace {

std::vector<std::size_t> order_by_mean(const Matrix& m, bool rows, bool descending) {
  const std::size_t n = rows ? m.rows() : m.cols();
  const std::size_t k = rows ? m.cols() : m.rows();
  std::vector<double> means(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) means[i] += rows ? m(i, t) : m(t, i);
    means[i] /= static_cast<double>(k);
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? means[a] > means[b] : means[a] < means[b];
  });
  return idx;
}

void permuted(const Matrix& m, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
              bool descending, Matrix& out, std::vector<std::string>& out_rows, std::vector<std::string>& out_cols) {
  const auto ri = order_by_mean(m, true, descending);
  const auto ci = order_by_mean(m, false, descending);
  out = Matrix(m.rows(), m.cols());
  out_rows.clear();
  out_cols.clear();
  for (auto r : ri) out_rows.push_back(rows[r]);
  for (auto c : ci) out_cols.push_back(cols[c]);
  for (std::size_t r = 0; r < ri.size(); ++r)
    for (std::size_t c = 0; c < ci.size(); ++c) out(r, c) = m(ri[r], ci[c]);
}

}  // namespace

Heatmap performance_heatmap(const std::vector<std::string>& row_ids, const std::vector<std::string>& col_ids,
                            const Matrix& accuracy) {
  if (accuracy.rows() < 2 || accuracy.cols() < 2)
    throw std::invalid_argument("heatmap needs at least 2 configurations x 2 datasets");
  if (row_ids.size() != accuracy.rows() || col_ids.size() != accuracy.cols())
    throw std::invalid_argument("heatmap labels do not match matrix shape");
  Heatmap h;
  permuted(accuracy, row_ids, col_ids, true, h.accuracy, h.row_ids, h.col_ids);
  permuted(relative_regret(accuracy), row_ids, col_ids, false, h.regret, h.regret_row_ids, h.regret_col_ids);
  std::set<std::size_t> best;
  for (std::size_t c = 0; c < accuracy.cols(); ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < accuracy.rows(); ++r)
      if (accuracy(r, c) > accuracy(arg, c)) arg = r;
    best.insert(arg);
  }
  h.unique_best = best.size();
  return h;
}

Heatmap performance_heatmap(const std::vector<ReplayBundle>& bundles) {
  if (bundles.size() < 2) throw std::invalid_argument("heatmap needs at least 2 datasets");
  std::vector<std::map<std::string, double>> per(bundles.size());
  for (std::size_t d = 0; d < bundles.size(); ++d)
    for (const auto& rec : bundles[d].records) {
      const auto b = static_cast<std::size_t>(bundles[d].b_max);
      if (rec.val_curve.size() >= b) per[d].emplace(rec.config.key(), rec.val_curve[b - 1]);
    }
  std::vector<std::string> keys;
  std::set<std::string> seen;
  for (const auto& rec : bundles.front().records) {
    const auto key = rec.config.key();
    if (!seen.insert(key).second) continue;
    bool everywhere = true;
    for (const auto& m : per) everywhere = everywhere && m.count(key);
    if (everywhere) keys.push_back(key);
  }
  Matrix acc(keys.size(), bundles.size());
  std::vector<std::string> rows, cols;
  for (std::size_t r = 0; r < keys.size(); ++r) {
    rows.push_back("cfg" + std::to_string(r));
    for (std::size_t d = 0; d < bundles.size(); ++d) acc(r, d) = per[d].at(keys[r]);
  }
  for (const auto& b : bundles) cols.push_back(b.dataset);
  return performance_heatmap(rows, cols, acc);
}

void write_heatmap_csv(const std::filesystem::path& file, const std::vector<std::string>& rows,
                       const std::vector<std::string>& cols, const Matrix& m) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "config";
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r];
    for (std::size_t c = 0; c < cols.size(); ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

void write_heatmap_svg(const std::filesystem::path& file, const std::vector<std::string>& rows,
                       const std::vector<std::string>& cols, const Matrix& m, const std::string& title,
                       bool reproducible) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  const double cell_w = 24.0, cell_h = std::max(2.0, std::min(16.0, 600.0 / std::max<std::size_t>(1, rows.size())));
  const double left = 20.0, top = 40.0;
  const double width = left + cell_w * static_cast<double>(cols.size()) + 20.0;
  const double height = top + cell_h * static_cast<double>(rows.size()) + 20.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : m.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  if (!reproducible) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "<!-- generated " << buf << " -->\n";
  }
  out << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">" << title
      << " (" << rows.size() << " x " << cols.size() << ", range " << format_double(lo) << " .. "
      << format_double(hi) << ")</text>\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const int shade = static_cast<int>(std::lround(255.0 * (m(r, c) - lo) / span));
      out << "<rect x=\"" << left + cell_w * static_cast<double>(c) << "\" y=\""
          << top + cell_h * static_cast<double>(r) << "\" width=\"" << cell_w << "\" height=\"" << cell_h
          << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade << ")\"><title>" << rows[r] << " / "
          << cols[c] << ": " << format_double(m(r, c)) << "</title></rect>\n";
    }
  out << "</svg>\n";
}

}  // namespace multifid
