#include "multifid/run_history.hpp"

namespace multifid {

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::random: return "random";
    case Origin::model: return "model";
    case Origin::portfolio: return "portfolio";
  }
  return "random";
}

Origin origin_from_string(const std::string& s) {
  if (s == "random") return Origin::random;
  if (s == "model") return Origin::model;
  if (s == "portfolio") return Origin::portfolio;
  throw std::invalid_argument("unknown origin '" + s + "'");
}

json EvaluationRecord::to_json() const {
  json j;
  j["config_id"] = config_id;
  j["config"] = configuration.to_json();
  j["budget"] = budget;
  j["seed"] = seed;
  j["loss"] = loss;
  j["status"] = crashed ? "crashed" : "ok";
  j["origin"] = to_string(origin);
  j["bracket"] = bracket;
  j["rung"] = rung;
  j["wall_time"] = wall_time;
  j["timestamp"] = timestamp;
  if (learning_curve) j["learning_curve"] = *learning_curve;
  return j;
}

EvaluationRecord EvaluationRecord::from_json(const json& j, const ConfigurationSpace& space) {
  EvaluationRecord r;
  r.config_id = j.at("config_id").get<std::uint64_t>();
  r.configuration = space.configuration_from_json(j.at("config"));
  r.budget = j.at("budget").get<double>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.loss = j.at("loss").get<double>();
  r.crashed = j.value("status", std::string("ok")) == "crashed";
  r.origin = origin_from_string(j.value("origin", std::string("random")));
  r.bracket = j.value("bracket", 0);
  r.rung = j.value("rung", 0);
  r.wall_time = j.value("wall_time", 0.0);
  r.timestamp = j.value("timestamp", 0.0);
  if (j.contains("learning_curve")) r.learning_curve = j["learning_curve"].get<std::vector<double>>();
  return r;
}

void RunHistory::append(EvaluationRecord record) {
  const bool tracks = record.budget == trajectory_budget_;
  const double loss = record.loss;
  const double ts = record.timestamp;
  const double budget = record.budget;
  records_.push_back(std::move(record));
  if (tracks && (!best_ || loss < *best_)) {
    best_ = loss;
    trajectory_.push_back({ts, records_.size(), budget, loss});
  }
}

std::vector<std::size_t> RunHistory::indices_at(double budget) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (records_[i].budget == budget) out.push_back(i);
  return out;
}

std::size_t RunHistory::count_at(double budget) const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.budget == budget;
  return n;
}

const EvaluationRecord& incumbent(const RunHistory& history, double budget) {
  const EvaluationRecord* best = nullptr;
  for (const auto& r : history.records())
    if (r.budget == budget && (!best || r.loss < best->loss)) best = &r;
  if (!best) throw NoRecordsError("no records at budget " + std::to_string(budget));
  return *best;
}

}  // namespace multifid
