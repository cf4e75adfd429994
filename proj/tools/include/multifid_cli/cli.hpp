#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <multifid/configspace.hpp>
#include <multifid/executor.hpp>
#include <multifid/replay.hpp>

namespace multifid::cli {

/// Bad flag combinations; the process exits with status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ObjectiveOptions {
  bool strict_replay = false;
  /// Validation instances for synthetic objectives (0 disables predictions).
  std::size_t synthetic_predictions = 200;
  std::optional<double> synthetic_noise;
};

struct ObjectiveHandle {
  std::shared_ptr<const Objective> objective;
  std::string dataset;
  std::shared_ptr<const ReplayBundle> bundle;  // replay objectives only
};

/// replay:<path>, synthetic:<default|v<k>>, socket:<host:port>.
ObjectiveHandle make_objective(const std::string& uri, std::shared_ptr<const ConfigurationSpace> space,
                               const ObjectiveOptions& options = {});

/// Runs one command line (arguments after the program name); returns the process exit
/// status (0 ok, 1 failure, 2 usage).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace multifid::cli
