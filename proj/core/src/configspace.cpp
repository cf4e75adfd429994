#include "multifid/configspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace multifid {

namespace {

std::string type_name(ParamType t) {
  switch (t) {
    case ParamType::integer: return "int";
    case ParamType::real: return "float";
    case ParamType::categorical: return "cat";
    case ParamType::boolean: return "bool";
  }
  return "?";
}

ParamType parse_type(const std::string& s, const std::string& field) {
  if (s == "int" || s == "integer") return ParamType::integer;
  if (s == "float" || s == "real") return ParamType::real;
  if (s == "cat" || s == "categorical") return ParamType::categorical;
  if (s == "bool" || s == "boolean") return ParamType::boolean;
  throw SpaceError(field, "unknown type '" + s + "'");
}

Value value_from_json(const json& j, const std::string& field) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw SpaceError(field, "expected a scalar value");
}

bool values_equal(const Value& a, const Value& b) { return a == b; }

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          std::ostringstream os;
          os << x;
          return os.str();
        }
      },
      v);
}

json value_to_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

// ---------------------------------------------------------------------------
// HyperparameterSpec

std::size_t HyperparameterSpec::levels() const {
  if (type == ParamType::categorical) return choices.size();
  if (type == ParamType::boolean) return 2;
  return 0;
}

Value HyperparameterSpec::coerce(const Value& v) const {
  switch (type) {
    case ParamType::real:
      if (auto* d = std::get_if<double>(&v)) return *d;
      if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
      break;
    case ParamType::integer:
      if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
      if (auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d && std::isfinite(*d))
        return static_cast<std::int64_t>(*d);
      break;
    case ParamType::categorical:
      if (auto* s = std::get_if<std::string>(&v)) return *s;
      break;
    case ParamType::boolean:
      if (auto* b = std::get_if<bool>(&v)) return *b;
      if (auto* s = std::get_if<std::string>(&v)) {
        if (*s == "T" || *s == "true") return true;
        if (*s == "F" || *s == "false") return false;
      }
      break;
  }
  throw SpaceError(name, "value '" + to_string(v) + "' has the wrong type for " + type_name(type));
}

bool HyperparameterSpec::contains(const Value& v) const {
  switch (type) {
    case ParamType::real: {
      auto* d = std::get_if<double>(&v);
      return d && std::isfinite(*d) && *d >= lower && *d <= upper;
    }
    case ParamType::integer: {
      auto* i = std::get_if<std::int64_t>(&v);
      return i && static_cast<double>(*i) >= lower && static_cast<double>(*i) <= upper;
    }
    case ParamType::categorical: {
      auto* s = std::get_if<std::string>(&v);
      return s && std::find(choices.begin(), choices.end(), *s) != choices.end();
    }
    case ParamType::boolean:
      return std::holds_alternative<bool>(v);
  }
  return false;
}

std::optional<std::size_t> HyperparameterSpec::level_index(const Value& v) const {
  if (type == ParamType::boolean) {
    if (auto* b = std::get_if<bool>(&v)) return *b ? 1u : 0u;
    return std::nullopt;
  }
  if (type == ParamType::categorical) {
    if (auto* s = std::get_if<std::string>(&v)) {
      auto it = std::find(choices.begin(), choices.end(), *s);
      if (it != choices.end()) return static_cast<std::size_t>(it - choices.begin());
    }
  }
  return std::nullopt;
}

Value HyperparameterSpec::level_value(std::size_t index) const {
  if (type == ParamType::boolean) return index != 0;
  return choices.at(index);
}

// ---------------------------------------------------------------------------
// Configuration

double Configuration::number(const std::string& name) const {
  const Value& v = values_.at(name);
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  throw std::invalid_argument(name + " is not numeric");
}

json Configuration::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : values_) j[k] = value_to_json(v);
  return j;
}

// ---------------------------------------------------------------------------
// ConfigurationSpace

ConfigurationSpace::ConfigurationSpace(std::string name,
                                       std::vector<HyperparameterSpec> hyperparameters,
                                       std::vector<ConditionRule> conditions)
    : name_(std::move(name)), hps_(std::move(hyperparameters)), conditions_(std::move(conditions)) {
  for (std::size_t i = 0; i < hps_.size(); ++i) {
    auto& hp = hps_[i];
    const std::string field = "hyperparameters[" + std::to_string(i) + "]";
    if (hp.name.empty()) throw SpaceError(field + ".name", "empty name");
    if (!index_.emplace(hp.name, i).second)
      throw SpaceError(field + ".name", "duplicate name '" + hp.name + "'");
    if (hp.is_numeric()) {
      if (!std::isfinite(hp.lower) || !std::isfinite(hp.upper) || hp.lower > hp.upper)
        throw SpaceError(field + ".range", "lower bound exceeds upper bound");
      if (hp.log_scale && hp.lower <= 0.0)
        throw SpaceError(field + ".log", "log scale requires a positive lower bound");
      if (hp.type == ParamType::integer &&
          (std::floor(hp.lower) != hp.lower || std::floor(hp.upper) != hp.upper))
        throw SpaceError(field + ".range", "integer bounds must be integral");
    } else {
      if (hp.log_scale) throw SpaceError(field + ".log", "log scale on a non-numeric hyperparameter");
      if (hp.type == ParamType::categorical) {
        if (hp.choices.empty()) throw SpaceError(field + ".range", "empty categorical list");
        auto sorted = hp.choices;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
          throw SpaceError(field + ".range", "duplicate categorical value");
      }
    }
    try {
      hp.default_value = hp.coerce(hp.default_value);
    } catch (const SpaceError& e) {
      throw SpaceError(field + ".default", e.what());
    }
    if (!hp.contains(hp.default_value))
      throw SpaceError(field + ".default", "default '" + to_string(hp.default_value) + "' outside domain");
  }

  rules_by_child_.assign(hps_.size(), {});
  for (std::size_t r = 0; r < conditions_.size(); ++r) {
    auto& rule = conditions_[r];
    const std::string field = "conditions[" + std::to_string(r) + "]";
    auto child = index_of(rule.child);
    if (!child) throw SpaceError(field + ".child", "unknown hyperparameter '" + rule.child + "'");
    auto parent = index_of(rule.parent);
    if (!parent) throw SpaceError(field + ".parent", "unknown hyperparameter '" + rule.parent + "'");
    if (*child == *parent) throw SpaceError(field, "cyclic condition on '" + rule.child + "'");
    if (rule.activating_values.empty()) throw SpaceError(field + ".values", "no activating values");
    for (auto& v : rule.activating_values) {
      try {
        v = hps_[*parent].coerce(v);
      } catch (const SpaceError& e) {
        throw SpaceError(field + ".values", e.what());
      }
      if (!hps_[*parent].contains(v))
        throw SpaceError(field + ".values", "activating value '" + to_string(v) + "' outside parent domain");
    }
    rules_by_child_[*child].push_back(r);
  }

  // Topological order over parent -> child edges; cycles are rejected.
  std::vector<int> state(hps_.size(), 0);  // 0 new, 1 on stack, 2 done
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (state[i] == 2) return;
    if (state[i] == 1) throw SpaceError("conditions", "cyclic condition through '" + hps_[i].name + "'");
    state[i] = 1;
    for (auto r : rules_by_child_[i]) visit(index_.at(conditions_[r].parent));
    state[i] = 2;
    topo_order_.push_back(i);
  };
  for (std::size_t i = 0; i < hps_.size(); ++i) visit(i);
}

ConfigurationSpace ConfigurationSpace::from_json(const json& doc) {
  if (!doc.is_object()) throw SpaceError("$", "space document must be an object");
  static const std::set<std::string> top_keys = {"name", "description", "hyperparameters"};
  for (const auto& [k, _] : doc.items())
    if (!top_keys.count(k)) throw SpaceError(k, "unknown field");
  if (!doc.contains("hyperparameters") || !doc["hyperparameters"].is_array())
    throw SpaceError("hyperparameters", "missing or not an array");

  static const std::set<std::string> hp_keys = {"name", "type",      "range",
                                                "log",  "default",   "condition",
                                                "default_provenance"};
  std::vector<HyperparameterSpec> hps;
  std::vector<ConditionRule> rules;
  const auto& list = doc["hyperparameters"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& h = list[i];
    const std::string field = "hyperparameters[" + std::to_string(i) + "]";
    if (!h.is_object()) throw SpaceError(field, "must be an object");
    for (const auto& [k, _] : h.items())
      if (!hp_keys.count(k)) throw SpaceError(field + "." + k, "unknown field");
    HyperparameterSpec hp;
    if (!h.contains("name") || !h["name"].is_string()) throw SpaceError(field + ".name", "missing name");
    hp.name = h["name"].get<std::string>();
    if (!h.contains("type") || !h["type"].is_string()) throw SpaceError(field + ".type", "missing type");
    hp.type = parse_type(h["type"].get<std::string>(), field + ".type");
    hp.log_scale = h.value("log", false);

    const json range = h.contains("range") ? h["range"] : json();
    if (hp.is_numeric()) {
      if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
        throw SpaceError(field + ".range", "numeric range must be [lower, upper]");
      hp.lower = range[0].get<double>();
      hp.upper = range[1].get<double>();
    } else if (hp.type == ParamType::categorical) {
      if (!range.is_array()) throw SpaceError(field + ".range", "categorical range must be a list");
      for (const auto& c : range) {
        if (!c.is_string()) throw SpaceError(field + ".range", "categorical values must be strings");
        hp.choices.push_back(c.get<std::string>());
      }
    }

    if (h.contains("default")) {
      hp.default_value = value_from_json(h["default"], field + ".default");
    } else if (hp.is_numeric()) {
      hp.default_value = hp.log_scale ? std::sqrt(hp.lower * hp.upper) : 0.5 * (hp.lower + hp.upper);
      if (hp.type == ParamType::integer)
        hp.default_value = static_cast<std::int64_t>(std::llround(std::get<double>(hp.default_value)));
    } else if (hp.type == ParamType::categorical) {
      if (hp.choices.empty()) throw SpaceError(field + ".range", "empty categorical list");
      hp.default_value = hp.choices.front();
    } else {
      hp.default_value = false;
    }

    if (h.contains("condition") && !h["condition"].is_null()) {
      const auto& c = h["condition"];
      if (!c.is_object() || !c.contains("parent") || !c["parent"].is_string() || !c.contains("values") ||
          !c["values"].is_array())
        throw SpaceError(field + ".condition", "condition needs 'parent' and 'values'");
      ConditionRule rule;
      rule.child = hp.name;
      rule.parent = c["parent"].get<std::string>();
      for (const auto& v : c["values"]) rule.activating_values.push_back(value_from_json(v, field + ".condition.values"));
      rules.push_back(std::move(rule));
    }
    hps.push_back(std::move(hp));
  }
  return ConfigurationSpace(doc.value("name", std::string("space")), std::move(hps), std::move(rules));
}

ConfigurationSpace ConfigurationSpace::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpaceError(path.string(), "cannot open space file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpaceError(path.string(), std::string("malformed JSON: ") + e.what());
  }
  return from_json(doc);
}

json ConfigurationSpace::to_json() const {
  json list = json::array();
  for (const auto& hp : hps_) {
    json h;
    h["name"] = hp.name;
    h["type"] = type_name(hp.type);
    if (hp.is_numeric()) {
      if (hp.type == ParamType::integer)
        h["range"] = {static_cast<std::int64_t>(hp.lower), static_cast<std::int64_t>(hp.upper)};
      else
        h["range"] = {hp.lower, hp.upper};
    } else if (hp.type == ParamType::categorical) {
      h["range"] = hp.choices;
    }
    h["log"] = hp.log_scale;
    h["default"] = value_to_json(hp.default_value);
    for (auto r : rules_by_child_[index_.at(hp.name)]) {
      json vals = json::array();
      for (const auto& v : conditions_[r].activating_values) vals.push_back(value_to_json(v));
      h["condition"] = {{"parent", conditions_[r].parent}, {"values", vals}};
    }
    list.push_back(std::move(h));
  }
  return {{"name", name_}, {"hyperparameters", list}};
}

const HyperparameterSpec& ConfigurationSpace::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw SpaceError(name, "unknown hyperparameter");
  return hps_[it->second];
}

std::optional<std::size_t> ConfigurationSpace::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> ConfigurationSpace::active_set(const Configuration& assignment) const {
  for (const auto& [name, _] : assignment.values())
    if (!index_.count(name)) throw SpaceError(name, "unknown hyperparameter referenced");

  std::vector<bool> active(hps_.size(), false);
  std::set<std::string> out;
  for (auto i : topo_order_) {
    bool on = true;
    for (auto r : rules_by_child_[i]) {
      const auto& rule = conditions_[r];
      const auto p = index_.at(rule.parent);
      if (!active[p]) {
        on = false;
        break;
      }
      if (!assignment.contains(rule.parent))
        throw SpaceError(rule.parent, "active parent has no assigned value");
      const Value pv = hps_[p].coerce(assignment.at(rule.parent));
      if (std::none_of(rule.activating_values.begin(), rule.activating_values.end(),
                       [&](const Value& v) { return values_equal(v, pv); })) {
        on = false;
        break;
      }
    }
    active[i] = on;
    if (on) out.insert(hps_[i].name);
  }
  return out;
}

Configuration ConfigurationSpace::sample_uniform(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Configuration config;
  std::vector<bool> active(hps_.size(), false);
  for (auto i : topo_order_) {
    bool on = true;
    for (auto r : rules_by_child_[i]) {
      const auto& rule = conditions_[r];
      const auto p = index_.at(rule.parent);
      if (!active[p] || std::none_of(rule.activating_values.begin(), rule.activating_values.end(),
                                     [&](const Value& v) { return values_equal(v, config.at(rule.parent)); })) {
        on = false;
        break;
      }
    }
    active[i] = on;
    if (!on) continue;
    const auto& hp = hps_[i];
    if (hp.is_numeric()) {
      config.set(hp.name, decode_value(i, unit(rng)));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, hp.levels() - 1);
      config.set(hp.name, hp.level_value(pick(rng)));
    }
  }
  return config;
}

Configuration ConfigurationSpace::default_configuration() const {
  Configuration full;
  for (const auto& hp : hps_) full.set(hp.name, hp.default_value);
  const auto active = active_set(full);
  Configuration out;
  for (const auto& name : active) out.set(name, full.at(name));
  return out;
}

void ConfigurationSpace::validate(const Configuration& config) const {
  for (const auto& [name, value] : config.values()) {
    auto idx = index_of(name);
    if (!idx) throw SpaceError(name, "unknown hyperparameter");
    if (!hps_[*idx].contains(value)) throw SpaceError(name, "value '" + to_string(value) + "' outside domain");
  }
  std::set<std::string> active;
  try {
    active = active_set(config);
  } catch (const SpaceError& e) {
    throw SpaceError(e.field(), std::string("configuration incomplete: ") + e.what());
  }
  for (const auto& name : active)
    if (!config.contains(name)) throw SpaceError(name, "active hyperparameter not assigned");
  for (const auto& [name, _] : config.values())
    if (!active.count(name)) throw SpaceError(name, "inactive hyperparameter assigned");
}

Configuration ConfigurationSpace::configuration_from_json(const json& j) const {
  if (!j.is_object()) throw SpaceError("config", "configuration must be an object");
  Configuration config;
  for (const auto& [name, v] : j.items()) {
    const auto& hp = at(name);
    config.set(name, hp.coerce(value_from_json(v, name)));
  }
  validate(config);
  return config;
}

double ConfigurationSpace::encode_value(std::size_t index, const Value& raw) const {
  const auto& hp = hps_.at(index);
  const Value v = hp.coerce(raw);
  if (!hp.contains(v)) throw SpaceError(hp.name, "value '" + to_string(v) + "' outside domain");
  switch (hp.type) {
    case ParamType::real: {
      const double x = std::get<double>(v);
      if (hp.upper == hp.lower) return kInactiveNumeric;
      if (hp.log_scale) return (std::log(x) - std::log(hp.lower)) / (std::log(hp.upper) - std::log(hp.lower));
      return (x - hp.lower) / (hp.upper - hp.lower);
    }
    case ParamType::integer: {
      const double x = static_cast<double>(std::get<std::int64_t>(v));
      if (hp.log_scale) {
        if (hp.upper == hp.lower) return kInactiveNumeric;
        return (std::log(x) - std::log(hp.lower)) / (std::log(hp.upper) - std::log(hp.lower));
      }
      return (x - hp.lower + 0.5) / (hp.upper - hp.lower + 1.0);
    }
    case ParamType::categorical:
    case ParamType::boolean:
      return static_cast<double>(*hp.level_index(v));
  }
  return kInactiveNumeric;
}

Value ConfigurationSpace::decode_value(std::size_t index, double u) const {
  const auto& hp = hps_.at(index);
  switch (hp.type) {
    case ParamType::real: {
      u = std::clamp(u, 0.0, 1.0);
      if (hp.log_scale) {
        const double x = std::exp(std::log(hp.lower) + u * (std::log(hp.upper) - std::log(hp.lower)));
        return std::clamp(x, hp.lower, hp.upper);
      }
      return std::clamp(hp.lower + u * (hp.upper - hp.lower), hp.lower, hp.upper);
    }
    case ParamType::integer: {
      u = std::clamp(u, 0.0, 1.0);
      double x;
      if (hp.log_scale)
        x = std::round(std::exp(std::log(hp.lower) + u * (std::log(hp.upper) - std::log(hp.lower))));
      else
        x = std::floor(hp.lower + u * (hp.upper - hp.lower + 1.0));
      return static_cast<std::int64_t>(std::clamp(x, hp.lower, hp.upper));
    }
    case ParamType::categorical:
    case ParamType::boolean: {
      const double top = static_cast<double>(hp.levels() - 1);
      const double idx = std::clamp(std::round(u), 0.0, top);
      return hp.level_value(static_cast<std::size_t>(idx));
    }
  }
  return 0.0;
}

std::vector<double> ConfigurationSpace::to_unit_cube(const Configuration& config) const {
  validate(config);
  std::vector<double> out(hps_.size());
  for (std::size_t i = 0; i < hps_.size(); ++i) {
    const auto& hp = hps_[i];
    if (config.contains(hp.name))
      out[i] = encode_value(i, config.at(hp.name));
    else
      out[i] = hp.is_numeric() ? kInactiveNumeric : static_cast<double>(hp.levels());
  }
  return out;
}

Configuration ConfigurationSpace::from_unit_cube(std::span<const double> vector) const {
  if (vector.size() != hps_.size())
    throw SpaceError("vector", "length " + std::to_string(vector.size()) + " does not match dimension " +
                                   std::to_string(hps_.size()));
  Configuration full;
  for (std::size_t i = 0; i < hps_.size(); ++i) full.set(hps_[i].name, decode_value(i, vector[i]));
  const auto active = active_set(full);
  Configuration out;
  for (const auto& name : active) out.set(name, full.at(name));
  return out;
}

std::vector<DimensionInfo> ConfigurationSpace::dimension_kinds() const {
  std::vector<DimensionInfo> out;
  out.reserve(hps_.size());
  for (const auto& hp : hps_) {
    switch (hp.type) {
      case ParamType::real: out.push_back({DimKind::continuous, 0}); break;
      case ParamType::integer: out.push_back({DimKind::integer, 0}); break;
      default: out.push_back({DimKind::categorical, hp.levels() + 1}); break;
    }
  }
  return out;
}

}  // namespace multifid
