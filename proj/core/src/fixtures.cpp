#include "multifid/fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace multifid {

namespace {

std::vector<double> to_accuracy(const std::vector<double>& losses, double offset, int decimals) {
  const double scale = std::pow(10.0, decimals);
  std::vector<double> out;
  out.reserve(losses.size());
  for (double l : losses) out.push_back(std::round(std::clamp(1.0 - l + offset, 0.0, 1.0) * scale) / scale);
  return out;
}

}  // namespace

ReplayBundle record_synthetic_bundle(std::shared_ptr<const ConfigurationSpace> space, std::string space_ref,
                                     const BundleRecipe& recipe) {
  auto params = SyntheticCurveParams::standard(space->dimension(), recipe.variant);
  const SyntheticCurveObjective objective(space, params, recipe.dataset);
  ReplayBundle bundle;
  bundle.dataset = recipe.dataset;
  bundle.space_ref = std::move(space_ref);
  bundle.space = space;
  bundle.b_max = recipe.b_max;
  bundle.n_validation_instances = recipe.n_validation_instances;
  bundle.n_classes = recipe.n_classes;
  bundle.label_seed = hash_combine(recipe.seed, recipe.variant);

  // Every dataset of one seed shares the same configurations.
  Rng rng(hash_combine(recipe.seed, 0xf1c7u));
  for (std::size_t i = 0; i < recipe.n_configs; ++i) {
    ReplayRecord rec;
    rec.config = space->sample_uniform(rng);
    rec.seed = recipe.seed;
    const auto val = objective.curve(rec.config, recipe.b_max, recipe.seed);
    rec.val_curve = to_accuracy(val, 0.0, recipe.decimals);
    // Train accuracy sits above validation, test slightly below; drawn from other noise streams.
    const auto train = objective.curve(rec.config, recipe.b_max, recipe.seed + 1);
    const auto test = objective.curve(rec.config, recipe.b_max, recipe.seed + 2);
    rec.train_curve = to_accuracy(train, 0.03, recipe.decimals);
    rec.test_curve = to_accuracy(test, -0.01, recipe.decimals);
    for (int b : recipe.adaptive_budgets) {
      if (b > recipe.b_max) continue;
      rec.adaptive_val_curves[b] =
          to_accuracy(objective.adaptive_curve(rec.config, b, recipe.b_max, recipe.seed), 0.0, recipe.decimals);
    }
    bundle.records.push_back(std::move(rec));
  }
  validate_replay(bundle);
  return bundle;
}

}  // namespace multifid
