#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "multifid/common.hpp"

namespace multifid {

using json = nlohmann::json;

enum class ParamType { integer, real, categorical, boolean };

/// A hyperparameter value. Booleans and categoricals are kept distinct from numbers
/// so that conditions and encodings never guess at intent.
using Value = std::variant<bool, std::int64_t, double, std::string>;

std::string to_string(const Value& v);
json value_to_json(const Value& v);

/// Raised for malformed spaces and out-of-domain configurations. `field()` names the
/// offending schema location, e.g. `hyperparameters[3].default`.
class SpaceError : public std::invalid_argument {
 public:
  SpaceError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct HyperparameterSpec {
  std::string name;
  ParamType type = ParamType::real;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> choices;  // categorical only
  bool log_scale = false;
  Value default_value = 0.0;

  bool is_numeric() const { return type == ParamType::integer || type == ParamType::real; }
  /// Number of discrete levels (categorical and boolean); 0 for numeric.
  std::size_t levels() const;
  bool contains(const Value& v) const;
  /// Coerces JSON-ish values (e.g. integral doubles for int hyperparameters) into the
  /// canonical alternative for this type. Throws SpaceError if impossible.
  Value coerce(const Value& v) const;
  std::optional<std::size_t> level_index(const Value& v) const;
  Value level_value(std::size_t index) const;
};

struct ConditionRule {
  std::string child;
  std::string parent;
  std::vector<Value> activating_values;
};

class Configuration {
 public:
  using Map = std::map<std::string, Value>;

  Configuration() = default;
  explicit Configuration(Map values) : values_(std::move(values)) {}

  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const Value& at(const std::string& name) const { return values_.at(name); }
  void set(const std::string& name, Value v) { values_[name] = std::move(v); }
  void erase(const std::string& name) { values_.erase(name); }
  std::size_t size() const { return values_.size(); }
  const Map& values() const { return values_; }

  double number(const std::string& name) const;

  json to_json() const;
  /// Canonical text key; equal configurations have equal keys.
  std::string key() const { return to_json().dump(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  Map values_;
};

enum class DimKind { continuous, integer, categorical };

struct DimensionInfo {
  DimKind kind = DimKind::continuous;
  /// For categorical dimensions: number of real levels plus one "inactive" level.
  std::size_t levels = 0;
};

/// Encoding value used for numeric dimensions of inactive hyperparameters.
inline constexpr double kInactiveNumeric = 0.5;

class ConfigurationSpace {
 public:
  ConfigurationSpace(std::string name, std::vector<HyperparameterSpec> hyperparameters,
                     std::vector<ConditionRule> conditions);

  static ConfigurationSpace from_json(const json& doc);
  static ConfigurationSpace load(const std::filesystem::path& path);
  json to_json() const;

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return hps_.size(); }
  const std::vector<HyperparameterSpec>& hyperparameters() const { return hps_; }
  const std::vector<ConditionRule>& conditions() const { return conditions_; }
  const HyperparameterSpec& at(const std::string& name) const;
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Names reachable through satisfied conditions. The assignment must cover every
  /// hyperparameter whose activity is decided before reaching a child.
  std::set<std::string> active_set(const Configuration& assignment) const;

  Configuration sample_uniform(Rng& rng) const;
  Configuration default_configuration() const;

  /// Throws SpaceError unless exactly the active hyperparameters are assigned in-domain.
  void validate(const Configuration& config) const;
  Configuration configuration_from_json(const json& j) const;

  std::vector<double> to_unit_cube(const Configuration& config) const;
  Configuration from_unit_cube(std::span<const double> vector) const;
  std::vector<DimensionInfo> dimension_kinds() const;

  /// Unit-cube coordinate for a single active value.
  double encode_value(std::size_t index, const Value& v) const;
  /// Inverse of encode_value; clamps out-of-range coordinates.
  Value decode_value(std::size_t index, double coordinate) const;

 private:
  std::string name_;
  std::vector<HyperparameterSpec> hps_;
  std::vector<ConditionRule> conditions_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> topo_order_;
  std::vector<std::vector<std::size_t>> rules_by_child_;
};

}  // namespace multifid
