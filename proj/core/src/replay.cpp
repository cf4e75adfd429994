#include "multifid/replay.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "multifid/objectives.hpp"

namespace multifid {

namespace {

std::vector<double> read_curve(const json& j, const std::string& field) {
  if (!j.is_array()) throw ReplayError(field + ": curve must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ReplayError(field + ": curve values must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void check_curve(const std::vector<double>& curve, std::size_t min_length, const std::string& field) {
  if (curve.size() < min_length)
    throw ReplayError(field + ": curve too short (" + std::to_string(curve.size()) + " < " +
                      std::to_string(min_length) + ")");
  for (double a : curve)
    if (!(a >= 0.0 && a <= 1.0)) throw ReplayError(field + ": accuracy out of [0,1]");
}

}  // namespace

void validate_replay(const ReplayBundle& bundle) {
  if (bundle.records.empty()) throw ReplayError("records: bundle has no records");
  if (bundle.b_max < 1) throw ReplayError("b_max: must be positive");
  const auto b_max = static_cast<std::size_t>(bundle.b_max);
  for (std::size_t i = 0; i < bundle.records.size(); ++i) {
    const auto& r = bundle.records[i];
    const std::string field = "records[" + std::to_string(i) + "]";
    check_curve(r.val_curve, b_max, field + ".val_curve");
    if (!r.train_curve.empty()) check_curve(r.train_curve, b_max, field + ".train_curve");
    if (!r.test_curve.empty()) check_curve(r.test_curve, b_max, field + ".test_curve");
    for (const auto& [b, c] : r.adaptive_val_curves)
      check_curve(c, static_cast<std::size_t>(b), field + ".adaptive_val_curves." + std::to_string(b));
  }
}

ReplayBundle load_replay(const std::filesystem::path& path, std::shared_ptr<const ConfigurationSpace> space) {
  std::ifstream in(path);
  if (!in) throw ReplayError(path.string() + ": cannot open replay file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ReplayError(path.string() + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw ReplayError("replay document must be an object");
  for (const char* key : {"dataset", "space", "b_max", "records"})
    if (!doc.contains(key)) throw ReplayError(std::string(key) + ": missing field");

  ReplayBundle b;
  b.dataset = doc["dataset"].get<std::string>();
  b.space_ref = doc["space"].get<std::string>();
  b.b_max = doc["b_max"].get<int>();
  b.n_validation_instances = doc.value("n_validation_instances", std::size_t{0});
  b.n_classes = doc.value("n_classes", std::size_t{2});
  b.label_seed = doc.value("label_seed", std::uint64_t{0});
  if (!space) {
    auto p = std::filesystem::path(b.space_ref);
    if (p.is_relative()) p = path.parent_path() / p;
    space = std::make_shared<ConfigurationSpace>(ConfigurationSpace::load(p));
  }
  b.space = space;

  const auto& records = doc["records"];
  if (!records.is_array()) throw ReplayError("records: must be an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string field = "records[" + std::to_string(i) + "]";
    if (!r.contains("config") || !r.contains("val_curve")) throw ReplayError(field + ": needs config and val_curve");
    ReplayRecord rec;
    try {
      rec.config = space->configuration_from_json(r["config"]);
    } catch (const SpaceError& e) {
      throw ReplayError(field + ".config: " + e.what());
    }
    rec.seed = r.value("seed", std::uint64_t{0});
    rec.val_curve = read_curve(r["val_curve"], field + ".val_curve");
    if (r.contains("train_curve")) rec.train_curve = read_curve(r["train_curve"], field + ".train_curve");
    if (r.contains("test_curve")) rec.test_curve = read_curve(r["test_curve"], field + ".test_curve");
    if (r.contains("adaptive_val_curves")) {
      for (const auto& [k, v] : r["adaptive_val_curves"].items())
        rec.adaptive_val_curves[std::stoi(k)] = read_curve(v, field + ".adaptive_val_curves." + k);
    }
    b.records.push_back(std::move(rec));
  }
  validate_replay(b);
  return b;
}

json replay_to_json(const ReplayBundle& bundle) {
  json records = json::array();
  for (const auto& r : bundle.records) {
    json j;
    j["config"] = r.config.to_json();
    j["seed"] = r.seed;
    j["val_curve"] = r.val_curve;
    if (!r.train_curve.empty()) j["train_curve"] = r.train_curve;
    if (!r.test_curve.empty()) j["test_curve"] = r.test_curve;
    if (!r.adaptive_val_curves.empty()) {
      json a = json::object();
      for (const auto& [budget, c] : r.adaptive_val_curves) a[std::to_string(budget)] = c;
      j["adaptive_val_curves"] = a;
    }
    records.push_back(std::move(j));
  }
  return {{"dataset", bundle.dataset},
          {"space", bundle.space_ref},
          {"b_max", bundle.b_max},
          {"n_validation_instances", bundle.n_validation_instances},
          {"n_classes", bundle.n_classes},
          {"label_seed", bundle.label_seed},
          {"records", records}};
}

ReplayObjective::ReplayObjective(std::shared_ptr<const ReplayBundle> bundle, ReplayMode mode, bool emit_predictions,
                                 double epoch_seconds)
    : bundle_(std::move(bundle)), mode_(mode), emit_predictions_(emit_predictions), epoch_seconds_(epoch_seconds) {
  validate_replay(*bundle_);
  for (std::size_t i = 0; i < bundle_->records.size(); ++i) {
    const auto& rec = bundle_->records[i];
    by_key_[rec.config.key()].push_back(i);
    encodings_.push_back(bundle_->space->to_unit_cube(rec.config));
  }
  if (bundle_->n_validation_instances > 0)
    labels_ = synthesize_labels(bundle_->n_validation_instances, bundle_->n_classes, bundle_->label_seed);
}

const ReplayRecord& ReplayObjective::lookup(const Configuration& config, std::uint64_t seed) const {
  auto pick_seed = [&](const std::vector<std::size_t>& idx) -> const ReplayRecord& {
    for (auto i : idx)
      if (bundle_->records[i].seed == seed) return bundle_->records[i];
    return bundle_->records[idx.front()];
  };
  if (auto it = by_key_.find(config.key()); it != by_key_.end()) return pick_seed(it->second);
  if (mode_ == ReplayMode::strict) throw ReplayError("configuration not recorded in " + bundle_->dataset);

  const auto u = bundle_->space->to_unit_cube(config);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < encodings_.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) d += (u[j] - encodings_[i][j]) * (u[j] - encodings_[i][j]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return pick_seed(by_key_.at(bundle_->records[best].config.key()));
}

JobResult ReplayObjective::evaluate(const Job& job) const {
  const int epoch = static_cast<int>(std::lround(job.budget));
  if (epoch < 1 || epoch > bundle_->b_max)
    throw ReplayError("budget " + std::to_string(job.budget) + " outside recorded curves");
  const auto& rec = lookup(job.configuration, job.seed);
  const auto e = static_cast<std::size_t>(epoch);
  JobResult r;
  r.job_id = job.job_id;
  r.loss = 1.0 - rec.val_curve[e - 1];
  std::vector<double> curve(e);
  for (std::size_t i = 0; i < e; ++i) curve[i] = 1.0 - rec.val_curve[i];
  r.learning_curve = std::move(curve);
  r.wall_time = epoch * epoch_seconds_;
  r.status = JobStatus::ok;
  if (emit_predictions_ && !labels_.empty()) {
    const std::uint64_t model_seed =
        hash_combine(hash_combine(fnv1a64(rec.config.key()), static_cast<std::uint64_t>(epoch)), rec.seed);
    r.predictions = synthesize_predictions(rec.val_curve[e - 1], labels_, bundle_->n_classes, model_seed);
  }
  return r;
}

}  // namespace multifid
