#include "multifid/run_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace multifid {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json RunMeta::to_json() const {
  json limits_json = {{"max_iterations", limits.max_iterations},
                      {"seed", limits.seed},
                      {"workers", limits.workers}};
  limits_json["wall_clock_seconds"] =
      std::isfinite(limits.wall_clock_seconds) ? json(limits.wall_clock_seconds) : json(nullptr);
  json j = {{"objective", objective}, {"space", space_path}, {"ladder", ladder.to_json()}, {"limits", limits_json}};
  j["portfolio"] = portfolio_path ? json(*portfolio_path) : json(nullptr);
  return j;
}

std::string RunMeta::run_id() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(to_json().dump());
  return os.str().substr(0, 12);
}

std::string model_id_for(const EvaluationRecord& record) {
  std::ostringstream os;
  os << "c" << record.config_id << "_b" << format_double(record.budget);
  return os.str();
}

void write_matrix_csv(const fs::path& file, const Matrix& m) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<double> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t n = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      data.push_back(std::stod(cell));
      ++n;
    }
    if (rows == 0) cols = n;
    if (n != cols) throw std::runtime_error(file.string() + ": ragged matrix row");
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

RunWriter::RunWriter(fs::path dir, const ConfigurationSpace& space, RunMeta meta, std::optional<std::vector<int>> labels)
    : dir_(std::move(dir)), meta_(std::move(meta)) {
  fs::create_directories(dir_);
  {
    std::ofstream out(dir_ / "space.json", std::ios::trunc);
    out << space.to_json().dump(2) << '\n';
  }
  if (labels) {
    fs::create_directories(dir_ / "predictions");
    std::ofstream out(dir_ / "predictions" / "labels.csv", std::ios::trunc);
    for (int l : *labels) out << l << '\n';
    has_labels_ = true;
  }
  history_out_.open(dir_ / "runhistory.jsonl", std::ios::trunc);
  if (!history_out_) throw std::runtime_error("cannot write " + (dir_ / "runhistory.jsonl").string());
}

void RunWriter::write_record(const EvaluationRecord& record, const JobResult& result) {
  history_out_ << record.to_json().dump() << '\n';
  history_out_.flush();
  if (!has_labels_ || record.crashed) return;
  const auto id = model_id_for(record);
  const auto file = dir_ / "predictions" / (id + ".csv");
  if (result.predictions) {
    write_matrix_csv(file, *result.predictions);
  } else if (!fs::exists(file)) {
    return;
  }
  manifest_.push_back({{"model_id", id},
                       {"budget", record.budget},
                       {"val_loss", record.loss},
                       {"timestamp", record.timestamp},
                       {"file", id + ".csv"}});
}

void RunWriter::finalize(const RunHistory& history) {
  history_out_.flush();
  {
    std::ofstream out(dir_ / "trajectory.csv", std::ios::trunc);
    out << "wall_time_s,n_evals,budget,incumbent_loss\n";
    for (const auto& p : history.trajectory())
      out << format_double(p.wall_time) << ',' << p.n_evals << ',' << format_double(p.budget) << ','
          << format_double(p.incumbent_loss) << '\n';
  }
  {
    json meta = meta_.to_json();
    meta["run_id"] = meta_.run_id();
    meta["n_records"] = history.size();
    std::ofstream out(dir_ / "meta.json", std::ios::trunc);
    out << meta.dump(2) << '\n';
  }
  if (has_labels_) {
    std::ofstream out(dir_ / "predictions" / "manifest.json", std::ios::trunc);
    out << json{{"labels", "labels.csv"}, {"models", manifest_}}.dump(2) << '\n';
  }
}

std::vector<EvaluationRecord> read_runhistory(const fs::path& file, const ConfigurationSpace& space) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  std::vector<EvaluationRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) {
      if (i + 1 == lines.size()) break;  // torn final write
      throw std::runtime_error(file.string() + ": malformed record on line " + std::to_string(i + 1));
    }
    out.push_back(EvaluationRecord::from_json(j, space));
  }
  return out;
}

LoadedRun load_run(const fs::path& dir) {
  auto space = std::make_shared<const ConfigurationSpace>(ConfigurationSpace::load(dir / "space.json"));
  json meta = json::object();
  if (fs::exists(dir / "meta.json")) {
    std::ifstream in(dir / "meta.json");
    meta = json::parse(in);
  }
  double b_max = 0.0;
  if (meta.contains("ladder")) b_max = meta["ladder"].value("b_max", 0.0);
  auto records = read_runhistory(dir / "runhistory.jsonl", *space);
  if (b_max == 0.0)
    for (const auto& r : records) b_max = std::max(b_max, r.budget);
  RunHistory history(b_max);
  for (auto& r : records) history.append(std::move(r));
  return {space, std::move(history), std::move(meta)};
}

}  // namespace multifid
