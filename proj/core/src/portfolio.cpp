#include "multifid/portfolio.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "multifid/run_history.hpp"
#include "multifid/run_io.hpp"

namespace multifid {

void PerformanceMatrix::validate() const {
  if (scores.rows() != candidate_sources.size() || scores.cols() != datasets.size() ||
      (!candidates.empty() && candidates.size() != candidate_sources.size()))
    throw std::invalid_argument("performance matrix shape does not match candidates x datasets");
  for (double a : scores.data())
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("performance matrix accuracy outside [0,1]");
}

Matrix relative_regret(const Matrix& scores, RegretKind kind) {
  Matrix out(scores.rows(), scores.cols());
  for (std::size_t d = 0; d < scores.cols(); ++d) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < scores.rows(); ++c) best = std::max(best, scores(c, d));
    for (std::size_t c = 0; c < scores.rows(); ++c) {
      const double gap = best - scores(c, d);
      if (kind == RegretKind::absolute)
        out(c, d) = gap;
      else
        out(c, d) = best == 0.0 ? 0.0 : gap / best;
    }
  }
  return out;
}

GreedyPortfolio greedy_build(const Matrix& regrets, std::size_t size) {
  if (size == 0) throw std::invalid_argument("portfolio size must be at least 1");
  if (size > regrets.rows())
    throw std::invalid_argument("portfolio size " + std::to_string(size) + " exceeds " +
                                std::to_string(regrets.rows()) + " candidates");
  const std::size_t n_data = regrets.cols();
  std::vector<double> current(n_data, std::numeric_limits<double>::infinity());
  std::vector<bool> used(regrets.rows(), false);
  GreedyPortfolio out;
  for (std::size_t step = 0; step < size; ++step) {
    std::size_t best = regrets.rows();
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < regrets.rows(); ++c) {
      if (used[c]) continue;
      double sum = 0.0;
      for (std::size_t d = 0; d < n_data; ++d) sum += std::min(current[d], regrets(c, d));
      if (best == regrets.rows() || sum < best_sum) {
        best = c;
        best_sum = sum;
      }
    }
    used[best] = true;
    for (std::size_t d = 0; d < n_data; ++d) current[d] = std::min(current[d], regrets(best, d));
    out.order.push_back(best);
    out.mean_regret.push_back(n_data ? best_sum / static_cast<double>(n_data) : 0.0);
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> portfolio_size_curve(const Matrix& regrets, std::size_t max_size) {
  const auto greedy = greedy_build(regrets, std::min(max_size, regrets.rows()));
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < greedy.mean_regret.size(); ++i) out.emplace_back(i + 1, greedy.mean_regret[i]);
  return out;
}

json Portfolio::to_json() const {
  json entries_json = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i)
    entries_json.push_back({{"config", entries[i].to_json()},
                            {"source_run", i < source_runs.size() ? source_runs[i] : std::string()},
                            {"rank", i + 1}});
  return {{"version", 1},
          {"space", space_ref},
          {"entries", entries_json},
          {"construction", {{"regret_curve", regret_curve}, {"dataset_ids", dataset_ids}}}};
}

Portfolio Portfolio::from_json(const json& j, const ConfigurationSpace& space) {
  Portfolio p;
  p.space_ref = j.value("space", std::string());
  std::set<std::string> seen;
  for (const auto& e : j.at("entries")) {
    auto config = space.configuration_from_json(e.at("config"));
    if (!seen.insert(config.key()).second) throw std::invalid_argument("portfolio entries must be unique");
    p.entries.push_back(std::move(config));
    p.source_runs.push_back(e.value("source_run", std::string()));
  }
  if (j.contains("construction")) {
    p.regret_curve = j["construction"].value("regret_curve", std::vector<double>{});
    p.dataset_ids = j["construction"].value("dataset_ids", std::vector<std::string>{});
  }
  return p;
}

Portfolio Portfolio::load(const std::filesystem::path& path, const ConfigurationSpace& space) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read portfolio " + path.string());
  return from_json(json::parse(in), space);
}

void Portfolio::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write portfolio " + path.string());
  out << to_json().dump(2) << '\n';
}

Portfolio make_portfolio(const PerformanceMatrix& matrix, const GreedyPortfolio& greedy, std::string space_ref) {
  Portfolio p;
  p.space_ref = std::move(space_ref);
  for (auto idx : greedy.order) {
    p.entries.push_back(matrix.candidates[idx]);
    p.source_runs.push_back(matrix.candidate_sources[idx]);
  }
  p.regret_curve = greedy.mean_regret;
  p.dataset_ids = matrix.datasets;
  return p;
}

PerformanceMatrix build_matrix(const std::vector<std::filesystem::path>& run_dirs,
                               const std::vector<std::shared_ptr<const Objective>>& objectives,
                               const std::vector<std::string>& dataset_ids, double b_max, int workers,
                               std::uint64_t seed) {
  if (objectives.size() != dataset_ids.size()) throw std::invalid_argument("one dataset id per objective required");
  PerformanceMatrix m;
  m.datasets = dataset_ids;
  std::set<std::string> seen;
  for (const auto& dir : run_dirs) {
    const auto run = load_run(dir);
    const auto& best = incumbent(run.history, b_max);
    if (!seen.insert(best.configuration.key()).second) continue;
    m.candidates.push_back(best.configuration);
    m.candidate_sources.push_back(dir.filename().string());
  }

  const std::size_t n_c = m.candidates.size();
  const std::size_t n_d = objectives.size();
  m.scores = Matrix(n_c, n_d);
  m.imputed.assign(n_c * n_d, false);
  for (std::size_t d = 0; d < n_d; ++d) {
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < n_c; ++c) jobs.push_back({c, m.candidates[c], b_max, seed});
    for (const auto& r : serve(objectives[d], jobs, workers)) {
      const auto c = static_cast<std::size_t>(r.job_id);
      if (r.status == JobStatus::ok) {
        m.scores(c, d) = std::clamp(1.0 - r.loss, 0.0, 1.0);
      } else {
        m.scores(c, d) = 0.0;
        m.imputed[c * n_d + d] = true;
      }
    }
  }
  m.validate();
  return m;
}

void write_performance_csv(const std::filesystem::path& file, const PerformanceMatrix& matrix) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "candidate";
  for (const auto& d : matrix.datasets) out << ',' << d;
  out << '\n';
  for (std::size_t c = 0; c < matrix.candidates.size(); ++c) {
    out << matrix.candidate_sources[c];
    for (std::size_t d = 0; d < matrix.datasets.size(); ++d) out << ',' << format_double(matrix.scores(c, d));
    out << '\n';
  }
}

PerformanceMatrix read_performance_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  PerformanceMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(file.string() + ": empty matrix");
  auto header = split(line);
  m.datasets.assign(header.begin() + 1, header.end());
  std::vector<double> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size()) throw std::runtime_error(file.string() + ": ragged matrix row");
    m.candidate_sources.push_back(cells[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) data.push_back(std::stod(cells[i]));
  }
  m.scores = Matrix(m.candidate_sources.size(), m.datasets.size(), std::move(data));
  m.imputed.assign(m.scores.data().size(), false);
  m.validate();
  return m;
}

}  // namespace multifid
