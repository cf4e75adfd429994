#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "multifid/objectives.hpp"
#include "multifid/replay.hpp"

namespace multifid {

struct BundleRecipe {
  std::string dataset;
  std::uint64_t variant = 1;
  std::size_t n_configs = 200;
  int b_max = 50;
  std::vector<int> adaptive_budgets{12, 25, 50};
  std::size_t n_validation_instances = 200;
  std::size_t n_classes = 2;
  std::uint64_t seed = 0;
  /// Stored accuracies are rounded to this many decimals.
  int decimals = 4;
};

/// Replay bundle recorded from the synthetic curve objective of the given variant:
/// uniformly sampled configurations (shared by every dataset of one seed) with their
/// validation, train and test curves and budget-annealed validation curves.
ReplayBundle record_synthetic_bundle(std::shared_ptr<const ConfigurationSpace> space, std::string space_ref,
                                     const BundleRecipe& recipe);

}  // namespace multifid
